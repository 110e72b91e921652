"""Pydantic request/response models for the HTTP API.

Field names match the wire casing; converters bridge to the core config
dataclasses, which own the semantic validation.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator

from ..minimap import MinimapConfig
from ..semzoom import DEFAULT_THRESHOLDS, RULE_NAMES, ZoomConfig


class ZoomSettings(BaseModel):
    algorithm: str = "kmeans"
    clusterCount: int | None = Field(default=None, ge=1)
    bandwidth: float = Field(default=25.0, gt=0)
    levelThresholds: list[float] = Field(default_factory=lambda: list(DEFAULT_THRESHOLDS))
    seed: int = 7
    featureFlags: dict[str, bool] = Field(default_factory=dict)
    commHideQuantile: float = Field(default=0.5, ge=0.0, le=1.0)
    autoCloseDepth: int = Field(default=1, ge=1)

    @field_validator("algorithm")
    @classmethod
    def _algorithm(cls, value: str) -> str:
        if value not in ("kmeans", "meanshift"):
            raise ValueError("algorithm must be 'kmeans' or 'meanshift'")
        return value

    @field_validator("levelThresholds")
    @classmethod
    def _thresholds(cls, value: list[float]) -> list[float]:
        if len(value) != 4 or any(b <= a for a, b in zip(value, value[1:])) or value[0] <= 0:
            raise ValueError("levelThresholds must be 4 strictly ascending positive values")
        return value

    @field_validator("featureFlags")
    @classmethod
    def _flags(cls, value: dict[str, bool]) -> dict[str, bool]:
        unknown = set(value) - set(RULE_NAMES)
        if unknown:
            raise ValueError(f"unknown feature flags: {', '.join(sorted(unknown))}")
        return value

    def to_config(self) -> ZoomConfig:
        return ZoomConfig(
            algorithm=self.algorithm,
            cluster_count=self.clusterCount,
            bandwidth=self.bandwidth,
            level_thresholds=tuple(self.levelThresholds),
            seed=self.seed,
            feature_flags=dict(self.featureFlags),
            comm_hide_quantile=self.commHideQuantile,
            auto_close_depth=self.autoCloseDepth,
        ).validate()

    @classmethod
    def from_config(cls, config: ZoomConfig) -> "ZoomSettings":
        return cls(
            algorithm=config.algorithm,
            clusterCount=config.cluster_count,
            bandwidth=config.bandwidth,
            levelThresholds=list(config.level_thresholds),
            seed=config.seed,
            featureFlags=dict(config.feature_flags),
            commHideQuantile=config.comm_hide_quantile,
            autoCloseDepth=config.auto_close_depth,
        )


class MinimapSettings(BaseModel):
    areaFraction: float = Field(default=0.04, gt=0.0, le=0.25)
    corner: str = "top-right"
    zoom: float = Field(default=1.0, ge=0.5, le=10.0)
    markerMode: str = "camera"
    hiddenLayers: list[str] = Field(default_factory=list)
    enlargedFraction: float = Field(default=0.7, gt=0.0, le=1.0)

    @field_validator("markerMode")
    @classmethod
    def _mode(cls, value: str) -> str:
        if value not in ("camera", "target"):
            raise ValueError("markerMode must be 'camera' or 'target'")
        return value

    def to_config(self) -> MinimapConfig:
        return MinimapConfig(
            area_fraction=self.areaFraction,
            corner=self.corner,
            zoom=self.zoom,
            marker_mode=self.markerMode,
            hidden_layers=frozenset(self.hiddenLayers),
            enlarged_fraction=self.enlargedFraction,
        ).validate()

    @classmethod
    def from_config(cls, config: MinimapConfig) -> "MinimapSettings":
        return cls(
            areaFraction=config.area_fraction,
            corner=config.corner,
            zoom=config.zoom,
            markerMode=config.marker_mode,
            hiddenLayers=sorted(config.hidden_layers),
            enlargedFraction=config.enlarged_fraction,
        )


class SettingsDocument(BaseModel):
    zoom: ZoomSettings = Field(default_factory=ZoomSettings)
    minimap: MinimapSettings = Field(default_factory=MinimapSettings)


class LandscapeCreated(BaseModel):
    landscapeId: str
    applications: int
    classes: int
    links: int
    diagnostics: dict[str, int] = Field(default_factory=dict)


class HealthResponse(BaseModel):
    status: str = "ok"
