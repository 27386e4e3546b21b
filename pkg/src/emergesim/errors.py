class ConfigurationError(ValueError):
    """Invalid model or run parameters."""
