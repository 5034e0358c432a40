"""Error types shared across the package.

Every error carries a stable machine-readable ``code`` (frozen: these strings
are part of the public API contract), an HTTP status used by the service
layer, and a ``retryable`` hint for clients.
"""

from __future__ import annotations


class DreamloomError(Exception):
    code = "internal_error"
    http_status = 500
    retryable = False

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.code.replace("_", " "))
        self.message = str(self)
        self.context = context

    def to_api_error(self) -> dict:
        return {"code": self.code, "message": self.message, "retryable": self.retryable}


# --- story / scene domain ---------------------------------------------------

class EmptyTitle(DreamloomError):
    code = "empty_title"
    http_status = 422


class PositionOutOfRange(DreamloomError):
    code = "position_out_of_range"
    http_status = 422


class NotMetaphorical(DreamloomError):
    code = "not_metaphorical"
    http_status = 409


class InvalidSpec(DreamloomError):
    code = "invalid_spec"
    http_status = 422


class MissingSpec(DreamloomError):
    code = "missing_spec"
    http_status = 409


class UnknownStory(DreamloomError):
    code = "unknown_story"
    http_status = 404


class UnknownScene(DreamloomError):
    code = "unknown_scene"
    http_status = 404


class UnknownGeneration(DreamloomError):
    code = "unknown_generation"
    http_status = 404


# --- layout -------------------------------------------------------------------

class OrderViolation(DreamloomError):
    code = "order_violation"
    http_status = 409


# --- palette / colors ---------------------------------------------------------

class EmptyPalette(DreamloomError):
    code = "empty_palette"
    http_status = 409


class InvalidHex(DreamloomError):
    code = "invalid_hex"
    http_status = 422


class InvalidFilterPick(DreamloomError):
    code = "invalid_filter_pick"
    http_status = 422


class UndecodableImage(DreamloomError):
    code = "undecodable_image"
    http_status = 422


class EmptyImage(DreamloomError):
    code = "empty_image"
    http_status = 422


# --- prompt engine --------------------------------------------------------------

class UnparseableResponse(DreamloomError):
    code = "unparseable_response"
    http_status = 502
    retryable = True


# --- providers -------------------------------------------------------------------

class ProviderTimeout(DreamloomError):
    code = "provider_timeout"
    http_status = 504
    retryable = True


class ProviderRejected(DreamloomError):
    code = "provider_rejected"
    http_status = 502


class NotConfigured(DreamloomError):
    code = "not_configured"
    http_status = 503


class BadImagePayload(DreamloomError):
    code = "bad_image_payload"
    http_status = 502
    retryable = True


# --- persistence --------------------------------------------------------------------

class IoFailure(DreamloomError):
    code = "io_failure"
    http_status = 500


class CorruptBundle(DreamloomError):
    code = "corrupt_bundle"
    http_status = 500


class UnsupportedSchema(DreamloomError):
    code = "unsupported_schema"
    http_status = 409


# --- service ---------------------------------------------------------------------------

class BindFailure(DreamloomError):
    code = "bind_failure"
    http_status = 500
