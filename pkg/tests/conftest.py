import pytest

from edgeids.flow_ingest import apply_scaler, fit_scaler, stratified_split
from edgeids.synthetic import generate_synthetic


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="flows.csv"):
        p = tmp_path / name
        p.write_text(text)
        return p
    return _write


@pytest.fixture(scope="session")
def synthetic_split():
    """Scaled 80/20 split of the default synthetic data (n=2000, d=3, separation 8)."""
    m = generate_synthetic(n=2000, d=3, separation=8.0, class_ratio=0.5, seed=0)
    split = stratified_split(m, 0.8, seed=0)
    scaler = fit_scaler(split.train)
    return apply_scaler(scaler, split.train), apply_scaler(scaler, split.test)
