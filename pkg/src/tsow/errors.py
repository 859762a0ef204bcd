"""Error types. Every error carries a stable ``code`` used in CLI error objects."""

from __future__ import annotations


class TsowError(Exception):
    code = "TSOW_ERROR"

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self)}


class SizeLimitError(TsowError):
    code = "SIZE_LIMIT"


class InvalidSubsetError(TsowError):
    code = "INVALID_SUBSET"


class ProblemFileError(TsowError):
    code = "PROBLEM_FILE"

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self), "key": self.key}


class LayoutMismatchError(TsowError):
    code = "LAYOUT_MISMATCH"


class PhaseNeedsBinaryError(TsowError):
    code = "PHASE_NEEDS_BINARY"


class UnknownOutcomeError(TsowError):
    code = "UNKNOWN_OUTCOME"


class LengthMismatchError(TsowError):
    code = "LENGTH_MISMATCH"


class NotUnitaryError(TsowError):
    code = "NOT_UNITARY"


class UseLongVariantError(TsowError):
    code = "USE_LONG_VARIANT"


class CalibrationFailedError(TsowError):
    code = "CALIBRATION_FAILED"


class SamplingStallError(TsowError):
    code = "SAMPLING_STALL"


class OutputNotCanonicalError(TsowError):
    code = "OUTPUT_NOT_CANONICAL"

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class InstanceMismatchError(TsowError):
    code = "INSTANCE_MISMATCH"


class NoValidPairError(TsowError):
    code = "NO_VALID_PAIR"


class UndeterminedError(TsowError):
    code = "UNDETERMINED"


class SearchBudgetError(TsowError):
    code = "SEARCH_BUDGET"


class ConfigError(TsowError):
    code = "CONFIG"


class ContractError(TsowError):
    code = "CONTRACT"
