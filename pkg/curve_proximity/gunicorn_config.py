from os import environ as env
import multiprocessing

ENV_PREFIX = "CURVE_PROXIMITY_"


def setting(name, default):
    return env.get(f"{ENV_PREFIX}{name}", env.get(name, default))


bind = f":{int(setting('PORT', 5000))}"

# Solves are CPU bound, so one worker per core unless told otherwise
workers = int(setting('WORKERS', multiprocessing.cpu_count()))
worker_class = setting('WORKER_CLASS', 'gevent')
worker_connections = int(setting('WORKER_CONNECTIONS', '200'))

# Workers share the imported numpy/scipy pages
preload_app = setting('PRELOAD', 'true').lower() == 'true'

max_requests = int(setting('MAX_REQUESTS', '1000'))
max_requests_jitter = int(setting('MAX_REQUESTS_JITTER', '100'))

# Grid OPT requests can run for a while
graceful_timeout = int(setting('GRACEFUL_TIMEOUT', '30'))
timeout = int(setting('TIMEOUT', '120'))
