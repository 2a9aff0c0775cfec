"""Exception types shared across the toolkit."""


class NVSBenchError(Exception):
    """Base class for all toolkit errors."""


class FormatError(NVSBenchError):
    """Unsupported or corrupt image file content."""


class DomainError(NVSBenchError, ValueError):
    """Argument outside its documented domain."""


class DimensionMismatch(NVSBenchError):
    """Paired images do not share dimensions."""


class TooSmall(NVSBenchError):
    """Image is smaller than the metric's minimum window."""


class MaskMismatch(NVSBenchError):
    """Mask dimensions differ from the image."""


class GlobalOnlyKind(NVSBenchError):
    """Corruption kind cannot be restricted to a masked region."""


class SpawnError(NVSBenchError):
    """External metric provider process could not be started."""


class HandshakeError(NVSBenchError):
    """Provider did not produce a valid handshake line."""


class ProviderError(NVSBenchError):
    """Provider answered a request with an error object."""


class ProtocolError(NVSBenchError):
    """Provider violated the line protocol (bad id, bad JSON, early EOF)."""


class ProviderTimeout(NVSBenchError):
    """Provider did not answer within the per-request deadline."""


class ManifestError(NVSBenchError):
    """Benchmark manifest failed validation."""


class EmptyTable(NVSBenchError):
    """Aggregation requested on a table with no records."""


class NoData(NVSBenchError):
    """Plot requested for a kind with no summary rows."""
