from .errors import (
    FinslerKitError,
    InputError,
    ConfigError,
    PreconditionError,
    DegenerateBallError,
    NumericError,
    StencilError,
    ConstructionError,
    SearchFailureError,
)
from .settings import DATA_DIR, DEFAULT_OUTPUT_DIR, LOG_LEVEL, load_registry, registry_entry
from .serialization import write_json, write_csv, to_jsonable, format_value
