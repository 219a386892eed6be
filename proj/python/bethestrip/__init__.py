from ._bethestrip import *  # noqa: F401,F403
from ._bethestrip import __version__, BetheError, ConfigError, DomainError, VerificationFailure, Model
