import os

from flask import request

from curve_proximity.config import VERSION

PACKAGE_DIR = os.path.dirname(__file__)

# Data block fields worth repeating in a failure log line
QUERY_FIELDS = ("family", "kind", "error_mode", "epsilon", "grid_step", "budget")


def get_traceback_info(tb):
    """File, function and line of the innermost traceback frame inside this package."""
    last_frame = None
    while tb is not None:
        f = tb.tb_frame
        if f.f_code.co_filename.startswith(PACKAGE_DIR):
            last_frame = (f.f_code.co_filename, f.f_code.co_name, tb.tb_lineno)
        tb = tb.tb_next
    return last_frame


def request_summary() -> str:
    """Method, path, query string and the query settings found in the JSON data block."""
    args = request.query_string
    if isinstance(args, bytes):
        args = args.decode()
    summary = f"{request.method} {request.path}{'?' + args if args else ''}"

    data = request.get_json(silent=True) if request.is_json else None
    if isinstance(data, dict):
        fields = [f"{k}={data[k]!r}" for k in QUERY_FIELDS if k in data]
        curve = data.get("curve")
        if isinstance(curve, dict):
            fields.extend(f"curve.{k}={curve[k]!r}" for k in ("family", "kind") if k in curve)
        if fields:
            summary += f" [{', '.join(fields)}]"
    return summary


def log_with_traceback(log, traceback, msg, is_exception=False):
    location = ""
    tb_info = get_traceback_info(traceback)
    if tb_info:
        tb_file, tb_function, tb_line_no = tb_info
        location = f" - {os.path.relpath(tb_file, PACKAGE_DIR)}:{tb_function}:{tb_line_no}"

    message = f"{msg}{location} [{VERSION}] ({request_summary()})"
    if is_exception:
        log.exception(message)
    else:
        log.warning(message)
