"""Load config."""

import os
from pathlib import Path

import yaml

from fsccap.utils import custom_logger

ROOT_PATH = Path(__file__).resolve().parent.parent.parent
CONFIG_PATH = (
    Path(os.getenv("FSCCAP_CONFIG_PATH"))
    if os.getenv("FSCCAP_CONFIG_PATH")
    else ROOT_PATH / "fsccap" / "configs"
)
TESTS_PATH = ROOT_PATH / "tests" / "files"

logger = custom_logger.setup_logging(__name__)


def get_config(path):
    """
    Get the config.

    Parameters
    ----------
    path : str
       path to the config file

    Returns
    -------
    config : dict
        the loaded yaml config

    """
    # test if path exists and try default directories (CONFIG_PATH, TESTS_PATH)
    paths_to_try = [
        Path(path),
        CONFIG_PATH / path,
        TESTS_PATH / path,
    ]
    for path_to_try in paths_to_try:
        if path_to_try.is_file():
            break
    else:
        paths_str = ", ".join(map(str, paths_to_try))
        raise FileNotFoundError(
            f"Config file not found at any of the following paths: {paths_str}"
        )

    with open(path_to_try, "r") as f:
        config = yaml.safe_load(f)

    return config


def get_config_options(path, *sections):
    """
    Load the configuration options.

    Parameters
    ----------
    path : str
       path to the config file
    *sections : str
       the section of the config file to load
       the sections can be nested, e.g. "section", "subsections"

    Returns
    -------
    options : dict
        dictionary of options

    """
    config = get_config(path)

    options = {}

    # traverse the sections
    section_data = config
    try:
        for section in sections:
            section_data = section_data[section]
    except (KeyError, TypeError):
        logger.warning(
            f"Section {' > '.join(sections)} not found in the configuration."
        )
        return {}
    for key, value in section_data.items():
        options[key] = _config_reference(config, value, *sections)

    return options


def _config_reference(config, value, *sections):
    """
    Get the value of references in config.

    Parameters
    ----------
    config : dict
        the loaded config
    value : any
        The value in the section
    *sections : str
        the section of the config file to load

    Returns
    -------
    value : any
        the value of the option

    Notes
    -----
    There are certain special characters
    `static`: reference to the static block next to the section
    `$`: reference to an environment variable

    """
    if not isinstance(value, str):
        return value

    value = value.strip()
    if value.startswith("static."):
        config_static = config
        for section in sections[:-1]:
            config_static = config_static[section]
        config_static = config_static.get("static", {})
        ref_option = value[len("static.") :]
        ref_value = config_static.get(ref_option)
        if ref_value is None:
            logger.warning(f"Static reference `static.{ref_option}` not found.")
        return ref_value
    elif value.startswith("$"):
        env_var = value[1:]
        env_value = os.getenv(env_var)
        if env_value is None:
            logger.warning(f"Environment variable {env_var} not found.")
        return env_value
    elif value.lower() in ["", "none", "null"]:
        return None
    return value


config_file = CONFIG_PATH / "config.yml"

SECTIONS = ["numerics", "maximin", "limits", "run"]

PRECISION_BITS = 64
TOL = 1e-6
BA_MAX_ITER = 20000
POSITIVITY_BITS = 40
MAXIMIN_ITERATIONS = 500
MAXIMIN_STEP = 1.0
ENUMERATION_CAP = 2**16
BLOCK_CELL_CAP = 2**16
THREADS = 1
BUDGET_M = 3
LOG_LEVEL = "INFO"


def load_settings(path=None):
    """
    Load the numeric settings into the module constants.

    The packaged config is read first and the options of `path` are laid over it,
    so an alternate file only needs the keys it changes.

    Parameters
    ----------
    path : str, optional
       path to an alternate config file

    Returns
    -------
    settings : dict
        the merged options per section of `config`

    """
    global PRECISION_BITS, TOL, BA_MAX_ITER, POSITIVITY_BITS
    global MAXIMIN_ITERATIONS, MAXIMIN_STEP, ENUMERATION_CAP, BLOCK_CELL_CAP
    global THREADS, BUDGET_M, LOG_LEVEL

    settings = {section: {} for section in SECTIONS}
    for config_path in [config_file] + ([path] if path else []):
        config = get_config(config_path).get("config") or {}
        for section in SECTIONS:
            if section in config:
                settings[section].update(
                    get_config_options(config_path, "config", section)
                )

    numerics = settings["numerics"]
    PRECISION_BITS = int(numerics.get("precision_bits", 64))
    TOL = float(numerics.get("tol", 1e-6))
    BA_MAX_ITER = int(numerics.get("ba_max_iter", 20000))
    POSITIVITY_BITS = int(numerics.get("positivity_bits", 40))

    maximin = settings["maximin"]
    MAXIMIN_ITERATIONS = int(maximin.get("iterations", 500))
    MAXIMIN_STEP = float(maximin.get("step", 1.0))

    limits = settings["limits"]
    ENUMERATION_CAP = int(limits.get("enumeration_cap", 2**16))
    BLOCK_CELL_CAP = int(limits.get("block_cell_cap", 2**16))

    run = settings["run"]
    THREADS = int(run.get("threads", 1))
    BUDGET_M = int(run.get("budget_m", 3))
    LOG_LEVEL = run.get("log_level") or "INFO"

    return settings


load_settings()
