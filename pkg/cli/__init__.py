from .config import RunConfig, COMMANDS, config_from_dict, load_config
from .commands import (
    COMMAND_HANDLERS,
    cmd_validate_norm,
    cmd_smooth,
    cmd_check_hilbert,
    cmd_quotient,
    cmd_distances,
)
from .output import OUTPUT_FILES, EXIT_PASS, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INCONCLUSIVE
from .main import run
