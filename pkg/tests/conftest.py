import math
from pathlib import Path

import pytest

from mechq.device import DEFAULT_OPERATING_DELTA_HZ, DeviceParams

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "device.json"


@pytest.fixture(scope="session")
def params() -> DeviceParams:
    return DeviceParams.from_json_file(CONFIG)


@pytest.fixture(scope="session")
def op_delta() -> float:
    return 2.0 * math.pi * DEFAULT_OPERATING_DELTA_HZ


@pytest.fixture(scope="session")
def config_path() -> Path:
    return CONFIG
