from .config import StudyConfig, default_study_config, load_study_config, save_study_config
from .engine import ServiceError, StudyEngine
from .store import EventRecord, SessionStore

__all__ = [
    "EventRecord",
    "ServiceError",
    "SessionStore",
    "StudyConfig",
    "StudyEngine",
    "default_study_config",
    "load_study_config",
    "save_study_config",
]
