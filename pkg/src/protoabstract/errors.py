"""Exception hierarchy shared by every pipeline stage."""


class PipelineError(Exception):
    """Base class; the CLI turns these into machine-readable error JSON."""

    code = "pipeline_error"

    def to_dict(self) -> dict:
        return {"error": self.code, "type": type(self).__name__, "message": str(self)}


class BackendUnavailable(PipelineError):
    code = "backend_unavailable"


class ParseFailure(PipelineError):
    code = "parse_failure"


class SpanConflict(PipelineError):
    code = "span_conflict"


class TooLong(PipelineError):
    code = "too_long"


class EmptySplit(PipelineError):
    code = "empty_split"


class SequenceTooLong(PipelineError):
    code = "sequence_too_long"


class ShapeMismatch(PipelineError):
    code = "shape_mismatch"


class AllIgnored(PipelineError):
    code = "all_ignored"


class EmptyBatch(PipelineError):
    code = "empty_batch"


class Divergence(PipelineError):
    code = "divergence"

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss


class IOFailure(PipelineError):
    code = "io_failure"


class ConfigError(PipelineError):
    code = "config_error"
