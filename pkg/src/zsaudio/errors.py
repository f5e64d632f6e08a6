"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class FormatError(ToolkitError):
    """A file does not conform to one of the documented record formats."""


class ArityError(ToolkitError):
    """Prompt placeholders and supplied arguments do not match."""


class AlignmentError(ToolkitError):
    """Tables that must share shape or utterance ids do not line up."""


class DegenerateInputError(ToolkitError):
    """An operation received input without usable probability mass."""


class MissingGoldError(ToolkitError):
    """Evaluation was requested for rows that carry no reference label."""

    def __init__(self, utt_ids):
        self.utt_ids = list(utt_ids)
        super().__init__("missing gold labels for: " + ", ".join(self.utt_ids))


class InfeasiblePriorError(ToolkitError):
    """No reweighting can reach the target prior (zero-mass class)."""


class ConvergenceError(ToolkitError):
    """The prior-matching solver exhausted its sweep budget."""

    def __init__(self, iters: int, l1_gap: float):
        self.iters = iters
        self.l1_gap = l1_gap
        super().__init__(
            f"no convergence after {iters} sweeps; final L1 gap {l1_gap:.3e}"
        )


class OovError(ToolkitError):
    """A label character is missing from the scoring vocabulary."""

    def __init__(self, char: str):
        self.char = char
        super().__init__(f"character {char!r} not in vocabulary")


class UnsupportedError(ToolkitError):
    """The requested instance exceeds an oracle's brute-force budget."""
