"""Colored stderr logging for the package"""

import logging

import colorlog

ROOT_NAME = 'PaulSim'
FORMAT = '%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s'


def _install_handler():
    root = logging.getLogger(ROOT_NAME)
    if not any(getattr(h, '_paulsim', False) for h in root.handlers):
        handler = colorlog.StreamHandler()
        handler.setFormatter(colorlog.ColoredFormatter(FORMAT))
        handler._paulsim = True
        root.addHandler(handler)
        root.setLevel(logging.WARNING)
        root.propagate = False
    return root


def get_logger(name):
    """Return a logger below the package root, installing the handler once."""
    _install_handler()
    if not name.startswith(ROOT_NAME):
        name = f'{ROOT_NAME}.{name}'
    return logging.getLogger(name)


def set_verbosity(level):
    """Map a -v count (0, 1, 2) to WARNING, INFO, DEBUG on the package root."""
    levels = [logging.WARNING, logging.INFO, logging.DEBUG]
    root = _install_handler()
    root.setLevel(levels[min(max(int(level), 0), len(levels) - 1)])
