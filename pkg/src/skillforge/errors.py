"""Exception hierarchy shared across the package."""


class SkillForgeError(Exception):
    pass


# skill files and library state

class SkillFormatError(SkillForgeError, ValueError):
    """A skill or blacklist file could not be parsed."""

    def __init__(self, message, path=None):
        self.path = path
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class MalformedFrontMatter(SkillFormatError):
    pass


class MissingField(SkillFormatError):
    pass


class UnknownPredicate(SkillFormatError):
    pass


class BadPolarity(SkillFormatError):
    pass


class NegativeCount(SkillFormatError):
    pass


class MalformedEntry(SkillFormatError):
    pass


class LibraryInvariantError(SkillForgeError, ValueError):
    pass


class AmbiguousPolarity(SkillForgeError):
    """Both polarity variants of a routine intersect the subgoal keywords."""

    def __init__(self, skill_id):
        self.skill_id = skill_id
        super().__init__(f"both polarity variants of {skill_id!r} match the subgoal")


class UnknownSkill(SkillForgeError, KeyError):
    pass


class DemotedSkill(SkillForgeError):
    pass


# ledger

class LedgerError(SkillForgeError, ValueError):
    def __init__(self, message, task_id=None):
        self.task_id = task_id
        super().__init__(message)


class InvariantViolation(LedgerError):
    pass


class MissingTerminal(LedgerError):
    pass


class DuplicateTerminal(LedgerError):
    pass


class NonMonotoneStep(LedgerError):
    pass


class RowAfterTerminal(LedgerError):
    pass


class SchemaMismatch(LedgerError):
    pass


# metrics

class MetricError(SkillForgeError, ValueError):
    pass


class EmptyInput(MetricError):
    pass


class DegenerateCohort(MetricError):
    pass


class NoLLMCalls(MetricError):
    pass


class BadPartition(MetricError):
    pass


class ZeroTokens(MetricError):
    pass


class UnknownModel(MetricError, KeyError):
    pass


class LengthMismatch(MetricError):
    pass


# simulator

class ConfigInvalid(SkillForgeError, ValueError):
    pass
