from .app import canonical_json, create_app
from .config import ServiceConfig
from .jobs import JobRegistry
from .session import AnalysisSession

__all__ = ["AnalysisSession", "JobRegistry", "ServiceConfig", "canonical_json", "create_app"]
