hostname = 'unknownhost'
# noinspection PyBroadException
try:
    from socket import gethostname
    hostname = gethostname()
except Exception:
    pass

CURVE_SYSLOG_FORMAT = hostname + ' CP %(levelname)8s %(process)5d %(name)20s | %(message)s'
CURVE_LOG_FORMAT = '%(asctime)-16s %(levelname)8s ' + hostname + ' %(process)d %(name)30s | %(message)s'
CURVE_DATE_FORMAT = '%y/%m/%d %H:%M:%S'
