VARTN_ISSUE_URL = "https://github.com/vartn/vartn/issues"

THREADS_ENV_VAR = "VARTN_THREADS"
CONFIG_ENV_VAR = "VARTN_CONFIG"

# padding for products of up to four ladder operators
POLY_PAD = 4

SCHEMA_VERSION = 1

REPORT_FILE = "report.json"
AMPLITUDES_FILE = "amplitudes.csv"
SAMPLES_FILE = "samples.csv"
DISPLACEMENTS_FILE = "displacements.csv"
FIT_FILE = "fit.json"
CHECKPOINT_FILE = "state.json"
