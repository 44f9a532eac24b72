"""Online skill-library lifecycle, trajectory-ledger metrics and a seeded mock agent."""

from .errors import SkillForgeError

__version__ = "0.1.0"

__all__ = ["SkillForgeError", "__version__"]
