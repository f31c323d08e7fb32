from .config import RunConfig, parse_run_config, load_run_config, resolve_seed, check_arity, echo_config, SEED_ENV_VAR
from .main import main, build_parser
