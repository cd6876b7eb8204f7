# Irregularity Profiler - PyTest Configuration
# Configurações globais, fixtures e utilitários para testes

import math
from datetime import date, timedelta
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np
import pytest

from irregularity.core.config import get_settings
from irregularity.core.logging import configure_logging
from irregularity.series import TimeSeries

PROJECT_ROOT = Path(__file__).parent.parent
CONTRACTS_PATH = PROJECT_ROOT / "contracts" / "irregularity_cli.yaml"
DATA_DIR = PROJECT_ROOT / "data"
GBPUSD_FIXTURE = DATA_DIR / "gbpusd_daily.csv"
JPYUSD_FIXTURE = DATA_DIR / "jpyusd_daily.csv"

TRIANGLE_WAVE = [0, 1, 2, 3, 2, 1, 0, 1, 2, 3, 2, 1, 0]
SINE_PERIOD = 50


def make_series(values: Iterable[float], series_id: str = "synthetic", start: Optional[date] = None) -> TimeSeries:
    """TimeSeries com índices inteiros (ou datas diárias a partir de ``start``)"""
    values = tuple(float(v) for v in values)
    if start is None:
        timestamps = tuple(range(len(values)))
    else:
        timestamps = tuple(start + timedelta(days=i) for i in range(len(values)))
    return TimeSeries(id=series_id, timestamps=timestamps, values=values, source="test")


def sine_values(length: int, period: int = SINE_PERIOD) -> List[float]:
    return [math.sin(2 * math.pi * k / period) for k in range(length)]


def noisy_sine_values(length: int, seed: int = 20160101) -> List[float]:
    """Seno de amplitude 1 com ruído uniforme ±0.05 (semente fixa)"""
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-0.05, 0.05, size=length)
    return [v + e for v, e in zip(sine_values(length), noise)]


def inject_spikes(values: Sequence[float], indices: Iterable[int], magnitude: float = 10.0) -> List[float]:
    """Substitui as posições dadas por picos alternando +magnitude e -magnitude"""
    spiked = list(values)
    for n, index in enumerate(sorted(indices)):
        spiked[index] = magnitude if n % 2 == 0 else -magnitude
    return spiked


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch):
    """Settings limpos por teste: sem cache e sem variáveis IRREGULARITY_* herdadas"""
    import os

    for name in list(os.environ):
        if name.startswith("IRREGULARITY_"):
            monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("IRREGULARITY_ENVIRONMENT", "testing")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(autouse=True, scope="session")
def quiet_logging():
    """Logs estruturados apenas a partir de WARNING durante a suíte"""
    configure_logging(level="WARNING", fmt="console")


@pytest.fixture
def series_factory() -> Callable[..., TimeSeries]:
    return make_series


@pytest.fixture
def triangle_series() -> TimeSeries:
    return make_series(TRIANGLE_WAVE, series_id="triangle")


@pytest.fixture
def sine_series() -> TimeSeries:
    """Seno limpo de período 50, 10 períodos completos"""
    return make_series(sine_values(500), series_id="sine")


@pytest.fixture
def noisy_sine_series() -> TimeSeries:
    """Seno com ruído de 500 pontos"""
    return make_series(noisy_sine_values(500), series_id="noisy-sine")


@pytest.fixture
def constant_series() -> TimeSeries:
    return make_series([5.0] * 20, series_id="constant")


@pytest.fixture
def write_csv(tmp_path: Path) -> Callable[[str, str], Path]:
    """Grava um CSV literal em tmp_path e devolve o caminho"""

    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def rates_csv(write_csv) -> Path:
    """CSV bem formado de 5 linhas com cabeçalho date,rate"""
    return write_csv(
        "rates.csv",
        "date,rate\n"
        "2001-03-05,1.4630\n"
        "2001-03-06,1.4655\n"
        "2001-03-07,1.4580\n"
        "2001-03-08,1.4612\n"
        "2001-03-09,1.4598\n",
    )


def series_csv_text(values: Sequence[float], start: date = date(2000, 1, 3), header: str = "date,rate") -> str:
    lines = [header]
    for i, value in enumerate(values):
        lines.append(f"{(start + timedelta(days=i)).isoformat()},{value!r}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def spiky_csv(write_csv) -> Callable[[str, int, int], Path]:
    """CSV de um seno com ``spikes`` picos injetados, ``length`` pontos"""

    def _make(name: str, spikes: int, length: int = 1000) -> Path:
        indices = range(7, 7 + spikes * 13, 13)
        values = inject_spikes(sine_values(length), indices)
        return write_csv(name, series_csv_text(values))

    return _make


def pytest_configure(config):
    """Registra markers personalizados"""
    config.addinivalue_line("markers", "smoke: marca testes de smoke")
    config.addinivalue_line("markers", "regression: marca testes de regressão")
    config.addinivalue_line("markers", "integration: marca testes de integração")
    config.addinivalue_line("markers", "negative: marca testes negativos")
    config.addinivalue_line("markers", "boundary: marca testes de valores limite")
