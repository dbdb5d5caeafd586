import logging

from flask import Flask
from flask.logging import default_handler

from curve_proximity.api.base import api
from curve_proximity.api.v1 import apiv1
from curve_proximity.api.v1.instance import instance_api
from curve_proximity.api.v1.proofset import proofset_api
from curve_proximity.api.v1.query import query_api
from curve_proximity.error import errors
from curve_proximity.healthz import healthz

from curve_proximity import config

##########################
# App settings
app = Flask("curve_proximity")
app.logger.setLevel(60)  # This completely turns off the flask logger
app.config.update(
    SECRET_KEY=config.SECRET_KEY,
    JSON_SORT_KEYS=False,
)

app.register_blueprint(healthz)
app.register_blueprint(api)
app.register_blueprint(apiv1)
app.register_blueprint(errors)
app.register_blueprint(instance_api)
app.register_blueprint(proofset_api)
app.register_blueprint(query_api)

# Setup logging
app.logger.setLevel(config.LOGGER.getEffectiveLevel())
app.logger.removeHandler(default_handler)
for ph in config.LOGGER.parent.handlers:
    app.logger.addHandler(ph)


def main():
    wlog = logging.getLogger('werkzeug')
    wlog.setLevel(config.LOGGER.getEffectiveLevel())
    for h in config.LOGGER.parent.handlers:
        wlog.addHandler(h)

    app.run(host="0.0.0.0", debug=config.DEBUG)


if __name__ == '__main__':
    main()
