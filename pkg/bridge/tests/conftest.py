import socket
import threading
import time

import pytest
import uvicorn

from proofbridge.config import BridgeConfig
from proofbridge.server import create_app


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class LiveServer:
    """Uvicorn in a background thread, torn down after the test module."""

    def __init__(self, config: BridgeConfig):
        self.port = free_port()
        self.url = f"http://127.0.0.1:{self.port}"
        uv_config = uvicorn.Config(create_app(config), host="127.0.0.1", port=self.port, log_level="warning")
        self.server = uvicorn.Server(uv_config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def start(self) -> "LiveServer":
        self.thread.start()
        deadline = time.monotonic() + 10
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("bridge server did not start")
            time.sleep(0.02)
        return self

    def stop(self) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=5)


@pytest.fixture(scope="module")
def stub_bridge():
    server = LiveServer(BridgeConfig()).start()
    yield server
    server.stop()
