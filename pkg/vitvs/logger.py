import os
import datetime
import logging.config

import vitvs


def build_log_conf(log_to_file=True):
    """Return the ``dictConfig`` dict for the current ``vitvs.config``."""
    app_service_name = vitvs.config['app']['service_name']
    logger_config = vitvs.config['logger_config']
    debug_to_console = 'DEBUG' if logger_config['debug_to_console'] else 'INFO'
    debug_to_file = 'DEBUG' if logger_config['debug_to_file'] else 'INFO'

    handlers = {
        'console': {
            'class': 'logging.StreamHandler',
            'level': debug_to_console,
            'formatter': 'simple',
            'stream': 'ext://sys.stdout'
        },
    }
    if log_to_file:
        log_dir = logger_config['log_dir']
        if not os.path.exists(log_dir):
            os.makedirs(log_dir)
        log_file = '{}.log.{}'.format(app_service_name,
                                      datetime.datetime.now().strftime('%Y%m%d%H%M%S'))
        handlers['pro'] = {
            'class': 'logging.handlers.RotatingFileHandler',
            'level': debug_to_file,
            'formatter': 'standard',
            'filename': os.path.join(log_dir, log_file),
            'mode': 'w+',
            'maxBytes': 1024 * 1024 * 64,
            'backupCount': 20,
            'encoding': 'utf8'
        }

    return {
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'simple': {
                'format': '%(asctime)s [%(name)s:%(lineno)d] [%(levelname)s] %(message)s'
            },
            'standard': {
                'format': '%(asctime)s [%(threadName)s:%(thread)d] [%(name)s:%(lineno)d] '
                          '[%(levelname)s] %(message)s'
            },
        },
        'handlers': handlers,
        'loggers': {
            'vitvs': {
                'level': 'DEBUG',
                'handlers': list(handlers),
                'propagate': False
            }
        },
        'root': {
            'handlers': ['console'],
            'level': 'WARNING',
        }
    }


def configure(log_to_file=True):
    logging.config.dictConfig(build_log_conf(log_to_file=log_to_file))
