import logging
import os
import sys
from logging.handlers import TimedRotatingFileHandler

PACKAGE_LOGGER = "inertial"
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def init_log(log_dir=None, log_level=None, log_rotation_backup_count=None):
    logger = logging.getLogger(PACKAGE_LOGGER)
    if logger.handlers:
        return logger

    if log_dir is None or log_dir.strip() == "":
        handler = logging.StreamHandler(sys.stderr)
    else:
        if not log_dir.endswith(os.path.sep):
            log_dir += os.path.sep
        if not os.path.exists(log_dir):
            os.makedirs(log_dir)
        if log_rotation_backup_count is None:
            log_rotation_backup_count = 7
        handler = TimedRotatingFileHandler(log_dir + 'inertial-python.log', when="midnight", interval=1,
                                           backupCount=log_rotation_backup_count, encoding='utf-8')

    logger.setLevel(log_level or logging.WARNING)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    logger.propagate = False
    return logger


def fmt_float(value):
    return format(float(value), ".17g")


def fmt_vector(values, digits=6):
    return "[" + ", ".join(format(float(v), ".%dg" % digits) for v in values) + "]"
