"""Exception hierarchy.

Every error raised by the library derives from :class:`CraftError`, which is a
``ValueError`` so callers that only care about bad input can catch that.
"""


class CraftError(ValueError):
    """Base class for all library errors."""

    code = "craft_error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class SchemaError(CraftError):
    code = "schema_error"


class IngestError(CraftError):
    """Raised for a malformed data row; carries the row and column it hit."""

    code = "ingest_error"

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column

    def to_dict(self):
        out = super().to_dict()
        out["row"] = self.row
        out["column"] = self.column
        return out


class UnknownCategory(IngestError):
    code = "unknown_category"


class NonFiniteNumeric(IngestError):
    code = "non_finite_numeric"


class RowArityError(IngestError):
    code = "row_arity"


class EmptyDataset(CraftError):
    code = "empty_dataset"


class EmptyCluster(CraftError):
    code = "empty_cluster"


class RhoOutOfRange(CraftError):
    code = "rho_out_of_range"


class HyperparamError(CraftError):
    code = "hyperparam_error"


class KTooLarge(CraftError):
    code = "k_too_large"


class LengthMismatch(CraftError):
    code = "length_mismatch"


class NonBinaryFeature(CraftError):
    code = "non_binary_feature"


class NonNumericData(CraftError):
    """A numeric-only algorithm was handed categorical columns."""

    code = "non_numeric_data"

    def __init__(self, columns):
        super().__init__(
            "categorical columns require one-hot encoding first: " + ", ".join(columns)
        )
        self.columns = list(columns)

    def to_dict(self):
        out = super().to_dict()
        out["columns"] = self.columns
        return out


class SpecInvalid(CraftError):
    code = "spec_invalid"


class ConfigError(CraftError):
    code = "config_error"
