from .config import ServiceConfig, load_config
from .app import create_app, build_state, AppState

__all__ = ["ServiceConfig", "load_config", "create_app", "build_state", "AppState"]
