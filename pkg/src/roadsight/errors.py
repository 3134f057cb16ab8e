"""Exception types shared across the package."""


class RoadsightError(Exception):
    """Base class for all package errors."""


class FormatError(RoadsightError):
    """A file violates an interchange format rule.

    Carries the offending path, the byte offset where the violation was
    detected (or -1 when it is not byte-addressable) and the rule name.
    """

    def __init__(self, path, rule, offset=-1, detail=""):
        self.path = str(path)
        self.rule = rule
        self.offset = int(offset)
        self.detail = detail
        msg = f"{self.path}: {rule}"
        if self.offset >= 0:
            msg += f" at byte offset {self.offset}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ConfigError(RoadsightError):
    """Bad configuration file or value."""


class InvalidDetectionError(RoadsightError):
    """A detection cannot be processed (e.g. bounding box outside the frame)."""


class InvalidLabelError(RoadsightError):
    """A ground-truth label is unusable (e.g. non-positive actual distance)."""


class SceneSpecError(RoadsightError):
    """A synthetic scene specification is not renderable."""
