from platform import node

import statsd

import vitvs


class Monitor(statsd.StatsClient):
    """statsd client for synthesis and training counters.

    Metrics are prefixed with ``<hostname>.vitvs``; host and port come from
    ``vitvs.config['statsd']`` unless given explicitly.
    """

    def __init__(self, *args, **kwargs):
        settings = vitvs.config['statsd']
        kwargs.setdefault('prefix', '{}.{}'.format(node(), vitvs.config['app']['service_name']))
        kwargs.setdefault('host', settings['host'])
        kwargs.setdefault('port', settings['port'])
        super().__init__(*args, **kwargs)

    @property
    def rate(self):
        """Sample rate applied to every metric."""
        return vitvs.config['statsd']['rate']
