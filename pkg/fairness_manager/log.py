import logging
from sys import stdout

formatter = logging.Formatter(
    '[%(levelname)s %(asctime)s] {%(name)s:%(lineno)d} - %(message)s',
    '%m-%d %H:%M:%S')


def get_logger(name=__name__, with_formatter=True):
    logger = logging.getLogger(name)
    # modules call this at import time, tests import them repeatedly
    if not logger.handlers:
        handler = logging.StreamHandler(stdout)
        if with_formatter:
            handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.propagate = False
    return logger


def set_level(level, prefix='fairness_manager'):
    for name in list(logging.root.manager.loggerDict):
        if name == prefix or name.startswith(prefix + '.'):
            logging.getLogger(name).setLevel(level)
