import pytest

from inpaint360.documents import write_json

TINY_CONFIG = {
    "scene": {"cameras": {"num_views": 4, "width": 24, "height": 24}},
    "field": {"resolution": 8, "iterations": 20, "batch_rays": 64, "num_samples": 16, "log_every": 10},
    "refine": {"rays_per_view": 10, "max_rounds": 1},
    "prior": {
        "num_shapes": 4, "cubes_per_shape": 3, "cube_resolution": 8, "base_channels": 2,
        "train_steps": 3, "batch_size": 4, "cube_edge": 0.5, "cubes_per_step": 2, "log_every": 1,
    },
    "loss": {"patch_size": 8},
    "finetune": {"iterations": 2, "patches_per_step": 2, "num_samples": 8, "log_every": 1},
    "render": {"num_samples": 8, "orbit_views": 2},
    "eval": {"patch_size": 8},
}


@pytest.fixture
def tiny_config_path(tmp_path):
    path = tmp_path / "tiny.json"
    write_json(path, TINY_CONFIG)
    return path
