import logging
import os

from curve_proximity.common import forge, log as cp_log
from curve_proximity.common.logformat import CURVE_LOG_FORMAT

config = forge.get_config()


def _package_version():
    version_path = os.path.join(os.path.dirname(__file__), 'VERSION')
    if os.path.exists(version_path):
        with open(version_path) as version_file:
            return version_file.read().strip()
    return "1.0.0.dev0"


#################################################################
# Configuration

APP_NAME = "curve-proximity"
DEBUG = config.ui.debug
SECRET_KEY = config.ui.secret_key
VERSION = os.environ.get('CURVE_PROXIMITY_VERSION', _package_version())

# Seed used by generators and the bench harness when none is given
DEFAULT_SEED = int(os.environ.get('LP_SEED', 0))

SAMPLE_BUDGET_FACTOR = config.solver.budget_factor
SAMPLE_BUDGET_OFFSET = config.solver.budget_offset
REPLAY_KEY_TOLERANCE = config.solver.replay_key_tolerance
REPLAY_LENGTH_SLACK = config.solver.replay_length_slack

PROOFSET_MARGIN_SLACK = config.proofset.margin_slack

ORACLE_GRID_DIVISOR = config.oracle.grid_divisor
ORACLE_MAX_GRID = config.oracle.max_grid

BENCH_JOBS = config.bench.jobs
BENCH_OUTPUT_DIRECTORY = config.bench.output_directory

# End of Configuration
#################################################################

#################################################################
# Prepare loggers
config.logging.log_to_console = config.logging.log_to_console or DEBUG
cp_log.init_logging("curve_proximity", config.logging)

AUDIT_LOG = logging.getLogger('curve_proximity.audit')
LOGGER = logging.getLogger('curve_proximity.engine')

if DEBUG:
    AUDIT_LOG.setLevel(logging.INFO)

    if config.logging.log_to_file:
        fh = logging.FileHandler(os.path.join(config.logging.log_directory, 'curve_proximity_audit.log'))
        fh.setLevel(logging.INFO)
        fh.setFormatter(logging.Formatter(CURVE_LOG_FORMAT))
        AUDIT_LOG.addHandler(fh)

AUDIT_LOG.debug('Audit logger ready!')
LOGGER.debug('Logger ready!')

# End of prepare logger
#################################################################
