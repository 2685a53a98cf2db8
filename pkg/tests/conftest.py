import pytest

from weedmap.synth import FieldConfig, generate_field, save_field


@pytest.fixture(scope="session")
def small_field(tmp_path_factory):
    """A compact labeled field dataset on disk, shared across CLI tests."""
    cfg = FieldConfig(field_width_m=6.0, field_height_m=5.0, seed=13)
    raster, labels = generate_field(cfg)
    out = tmp_path_factory.mktemp("field")
    manifest_path = save_field(raster, labels, out, config=cfg)
    return manifest_path
