from pydantic import BaseModel, Field, model_validator


class PriorConfig(BaseModel):
    # occupancy threshold on density
    rho: float = Field(0.01, gt=0)
    # density that predicted-occupied voxels are pulled up to
    w: float = Field(20.0, gt=0)
    fraction_min: float = Field(0.03, gt=0, lt=1)
    fraction_max: float = Field(0.08, gt=0, lt=1)
    cubes_per_shape: int = Field(64, ge=1)
    num_shapes: int = Field(40, ge=1)
    lambda_geom: float = Field(0.01, ge=0)
    cube_resolution: int = Field(16, ge=4)
    t_star: int = Field(200, ge=1, le=1000)

    # application to a field
    cube_edge: float = Field(0.2, gt=0)
    visibility_radius_edges: float = Field(2.0, gt=0)
    cubes_per_step: int = Field(16, ge=1)

    # denoiser training
    base_channels: int = Field(16, ge=1)
    train_steps: int = Field(3000, ge=1)
    batch_size: int = Field(8, ge=1)
    lr: float = Field(2e-3, gt=0)
    grad_shards: int = Field(2, ge=1)
    log_every: int = Field(100, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check(self):
        if self.fraction_min > self.fraction_max:
            raise ValueError(f"fraction_min {self.fraction_min} exceeds fraction_max {self.fraction_max}")
        if self.cube_resolution % 4:
            raise ValueError("cube_resolution must be divisible by 4 (two 2x downsamples)")
        return self

    @property
    def visibility_radius(self) -> float:
        return self.visibility_radius_edges * self.cube_edge
