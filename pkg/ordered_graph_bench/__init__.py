import json
import logging
import os
from logging.handlers import RotatingFileHandler
from shutil import copyfile

from ordered_graph_bench.exceptions import ConfigurationError

module_path = os.path.abspath(os.path.dirname(__file__))
LOGGER_NAME = "ordered_graph_bench"


class BenchContext(object):
    """
    Configuration and logger shared by every command of one invocation
    """

    def __init__(self, config, logger, data_path):
        self.config = config
        self.logger = logger
        self.data_path = data_path


def load_config(config_path=None):
    """
    Load the central config file and merge a user config over it
    :param config_path: optional path to a user config json
    :return: config dict
    """
    with open(os.path.join(module_path, "config.json")) as f:
        config = json.load(f)
    if config_path is not None:
        try:
            with open(config_path) as f:
                user_config = json.load(f)
        except ValueError as e:
            raise ConfigurationError("Config file {} is not valid json: {}".format(config_path, e))
        if not isinstance(user_config, dict):
            raise ConfigurationError("Config file {} must hold a json object".format(config_path))
        for key, value in user_config.items():
            if isinstance(value, dict) and isinstance(config.get(key), dict):
                merged = dict(config[key])
                merged.update(value)
                config[key] = merged
            else:
                config[key] = value
    return config


def save_config(config, path):
    """
    Write a config dict as pretty-printed json
    :param config: config dict
    :param path: destination file
    """
    with open(path, 'w') as f:
        contents = json.dumps(config, sort_keys=True, indent=4, separators=(',', ': '))
        f.write(contents)


def _setup_logger(config, data_path, log_level=None):
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    level_name = (log_level or config.get("log_level", "INFO")).upper()
    numeric_loglevel = getattr(logging, level_name, None)
    invalid_level = not isinstance(numeric_loglevel, int)
    if invalid_level:
        numeric_loglevel = logging.INFO

    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    # setup logging handler for stderr
    stderr_handler = logging.StreamHandler()
    stderr_handler.setLevel(max(numeric_loglevel, logging.WARNING))
    stderr_handler.setFormatter(formatter)
    logger.addHandler(stderr_handler)

    file_handler = RotatingFileHandler(os.path.join(data_path, config.get("log_file", "bench.log")),
                                       maxBytes=1024000, backupCount=5)
    file_handler.setLevel(numeric_loglevel)
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

    if invalid_level:
        logger.warning("Invalid log level {0} in config, using INFO".format(level_name))
    logger.debug("Logging to file initialised")
    return logger


def create_context(config_path=None, data_path=None, log_level=None):
    """
    Load configuration, prepare the data directory and set up logging
    :param config_path: optional user config json
    :param data_path: overrides the data directory named in the config
    :param log_level: overrides the log level named in the config
    :return: BenchContext
    """
    config = load_config(config_path)
    data_path = os.path.abspath(data_path or config["data_path"])
    if os.path.isdir(data_path) is False:
        os.makedirs(data_path)

    data_config = os.path.join(data_path, "config.json")
    if config_path is None:
        if os.path.isfile(data_config):
            # a copy in the data directory wins over the central file
            config = load_config(data_config)
        else:
            copyfile(os.path.join(module_path, "config.json"), data_config)

    logger = _setup_logger(config, data_path, log_level)
    logger.info("Data path: " + data_path)
    return BenchContext(config, logger, data_path)
