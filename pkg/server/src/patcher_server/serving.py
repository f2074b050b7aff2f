"""Socket serving for the sidecar app.

Plain threaded WSGI from the standard library: each request gets its
own thread, which is what lets scoring calls overlap a long-running
generation while the app's own gate keeps generations serial.
"""

from __future__ import annotations

import logging
import threading
from socketserver import ThreadingMixIn
from wsgiref.simple_server import WSGIRequestHandler, WSGIServer, make_server

log = logging.getLogger("patcher_server")


class ThreadingWSGIServer(ThreadingMixIn, WSGIServer):
    daemon_threads = True


class _QuietHandler(WSGIRequestHandler):
    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        log.info("%s %s", self.address_string(), format % args)


def make_http_server(app, host: str = "127.0.0.1", port: int = 8441) -> WSGIServer:
    return make_server(
        host, port, app,
        server_class=ThreadingWSGIServer,
        handler_class=_QuietHandler,
    )


def start_background(app, host: str = "127.0.0.1", port: int = 0):
    """Serve on a daemon thread; returns (server, base_url).

    Port 0 picks a free port. Call server.shutdown() when done.
    """
    server = make_http_server(app, host, port)
    thread = threading.Thread(
        target=server.serve_forever, name="patcher-server", daemon=True
    )
    thread.start()
    bound_host, bound_port = server.server_address[:2]
    return server, f"http://{bound_host}:{bound_port}"


__all__ = ["ThreadingWSGIServer", "make_http_server", "start_background"]
