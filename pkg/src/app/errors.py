"""
Exception hierarchy for the harness.
Every error belongs to one of three families, each mapped to a CLI exit code.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_ADAPTER_ERROR = 3
EXIT_DATA_ERROR = 4


class HarnessError(Exception):
    """Base class. `exit_code` is what the CLI returns when the error escapes."""

    exit_code = 1


# --- Configuration ---


class ConfigError(HarnessError, ValueError):
    exit_code = EXIT_CONFIG_ERROR


class InvalidSpec(ConfigError):
    pass


# --- External adapters ---


class AdapterError(HarnessError):
    exit_code = EXIT_ADAPTER_ERROR


class AdapterTimeout(AdapterError):
    def __init__(self, role: str, timeout: float):
        super().__init__(f"{role} adapter timed out after {timeout:.1f}s")
        self.role = role
        self.timeout = timeout


class AdapterFailure(AdapterError):
    def __init__(self, role: str, exit_code: int, diagnostics: str = ""):
        super().__init__(f"{role} adapter exited with code {exit_code}: {diagnostics.strip()[-500:]}")
        self.role = role
        self.adapter_exit_code = exit_code
        self.diagnostics = diagnostics


class SchemaViolation(AdapterError):
    pass


# --- Data ---


class DataError(HarnessError, ValueError):
    exit_code = EXIT_DATA_ERROR


class MalformedLine(DataError):
    def __init__(self, line_no: int, reason: str = ""):
        super().__init__(f"line {line_no}: {reason}" if reason else f"line {line_no}")
        self.line_no = line_no


class CoordinateOutOfRange(DataError):
    def __init__(self, line_no: int, value: float):
        super().__init__(f"line {line_no}: coordinate {value} outside [0, 1]")
        self.line_no = line_no
        self.value = value


class UnknownClass(DataError):
    def __init__(self, line_no: int, class_id: int, class_count: int):
        super().__init__(f"line {line_no}: class {class_id} not in [0, {class_count})")
        self.line_no = line_no
        self.class_id = class_id


class DegenerateExtent(DataError):
    pass


class ZeroDimension(DataError):
    pass


class EmptyCrop(DataError):
    pass


class UnmappedClass(DataError):
    def __init__(self, name: str):
        super().__init__(f"class '{name}' has no mapping")
        self.name = name


class EmptyManifest(DataError):
    pass


class DuplicateId(DataError):
    def __init__(self, image_id: str):
        super().__init__(f"duplicate image id '{image_id}'")
        self.image_id = image_id


class InsufficientSyntheticPool(DataError):
    pass


class InsufficientRealPool(DataError):
    pass


class IoFailure(DataError):
    pass


class NoGroundTruth(DataError):
    pass


class ImageTooSmall(DataError):
    pass


class DegenerateSamples(DataError):
    pass


class OneSidedSamples(DataError):
    pass


class ModelFileInvalid(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class InsufficientPatches(DataError):
    pass


class SingularCovariance(DataError):
    pass


class MalformedRow(DataError):
    def __init__(self, row_no: int, reason: str):
        super().__init__(f"row {row_no}: {reason}")
        self.row_no = row_no


class RangeViolation(DataError):
    def __init__(self, row_no: int, metric: str, value: float):
        super().__init__(f"row {row_no}: {metric} value {value} out of range")
        self.row_no = row_no
        self.value = value


class SampleTooSmall(DataError):
    pass


class ConstantSample(DataError):
    pass


class EmptySample(DataError):
    pass


class InsufficientGroups(DataError):
    pass


class ZeroWithinVariance(DataError):
    pass


class EmptyGroup(DataError):
    def __init__(self, group: str):
        super().__init__(f"group '{group}' has no values")
        self.group = group
