from gevent.monkey import patch_all
patch_all()

from curve_proximity.app import app  # noqa: E402,F401
