from .settings import get_settings, ensure_directories


__all__ = ["get_settings", "ensure_directories"]