# -*- coding: utf-8 -*-
import functools
from datetime import datetime

from .constants import GROUP_KINDS
from .exceptions import ConfigurationException, UsageException
from .log import get_logger

logger = get_logger(__name__)


def ensure_supported_kind(kinds=GROUP_KINDS, argument='kind'):
    def decorator(func):
        @functools.wraps(func)
        def wrap(*args, **kwargs):
            kind = kwargs.get(argument, args[0] if args else None)
            if kind not in kinds:
                raise ConfigurationException(
                    "unsupported {} '{}', expected one of {}".format(
                        argument, kind, list(kinds)))
            return func(*args, **kwargs)

        return wrap

    return decorator


def validate_config(config_obj, config_cls):
    if config_obj is None:
        return config_cls()
    if isinstance(config_obj, dict):
        return config_cls(config_obj)
    if not isinstance(config_obj, config_cls):
        raise ConfigurationException(
            "Configuration object should be instance of {}".format(
                config_cls.__name__))
    return config_obj


def require_seed(func):
    @functools.wraps(func)
    def wrap(args, *rest, **kwargs):
        if getattr(args, 'seed', None) is None:
            name = getattr(args, 'command', None) or func.__name__
            raise UsageException(
                "{} is randomized and needs --seed".format(name))
        return func(args, *rest, **kwargs)

    return wrap


def time_it(function):
    @functools.wraps(function)
    def wrap(*args, **kwargs):
        start = datetime.now()
        result = function(*args, **kwargs)
        end = datetime.now()
        logger.debug("{} took {:.3f} seconds".format(
            function.__name__, (end - start).total_seconds()))
        return result

    return wrap
