__version__ = '0.3.0'
__short_version__ = '0.3'
