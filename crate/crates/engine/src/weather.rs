//! Weather presets and the lighting parameters they imply.

use serde::{Deserialize, Serialize};

use crate::math::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeatherPreset {
    ClearNoon,
    CloudyNoon,
    WetNoon,
    WetCloudyNoon,
    MidRainNoon,
    HardRainNoon,
    SoftRainNoon,
    ClearSunset,
}

impl WeatherPreset {
    pub const ALL: [WeatherPreset; 8] = [
        WeatherPreset::ClearNoon,
        WeatherPreset::CloudyNoon,
        WeatherPreset::WetNoon,
        WeatherPreset::WetCloudyNoon,
        WeatherPreset::MidRainNoon,
        WeatherPreset::HardRainNoon,
        WeatherPreset::SoftRainNoon,
        WeatherPreset::ClearSunset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeatherPreset::ClearNoon => "clear_noon",
            WeatherPreset::CloudyNoon => "cloudy_noon",
            WeatherPreset::WetNoon => "wet_noon",
            WeatherPreset::WetCloudyNoon => "wet_cloudy_noon",
            WeatherPreset::MidRainNoon => "mid_rain_noon",
            WeatherPreset::HardRainNoon => "hard_rain_noon",
            WeatherPreset::SoftRainNoon => "soft_rain_noon",
            WeatherPreset::ClearSunset => "clear_sunset",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn params(self) -> WeatherParams {
        match self {
            WeatherPreset::ClearNoon => WeatherParams {
                sky_color: [0.45, 0.67, 0.93],
                sun_dir: Vec3::new(0.3, 0.2, 0.93),
                sun_intensity: 0.85,
                ambient: 0.30,
                road_albedo_scale: 1.0,
                specular_boost: 1.0,
                wetness: 0.0,
            },
            WeatherPreset::CloudyNoon => WeatherParams {
                sky_color: [0.62, 0.66, 0.70],
                sun_dir: Vec3::new(0.3, 0.2, 0.93),
                sun_intensity: 0.45,
                ambient: 0.42,
                road_albedo_scale: 1.0,
                specular_boost: 1.0,
                wetness: 0.0,
            },
            WeatherPreset::WetNoon => WeatherParams {
                sky_color: [0.50, 0.62, 0.80],
                sun_dir: Vec3::new(0.3, 0.2, 0.93),
                sun_intensity: 0.70,
                ambient: 0.32,
                road_albedo_scale: 0.70,
                specular_boost: 1.8,
                wetness: 0.5,
            },
            WeatherPreset::WetCloudyNoon => WeatherParams {
                sky_color: [0.55, 0.60, 0.66],
                sun_dir: Vec3::new(0.3, 0.2, 0.93),
                sun_intensity: 0.40,
                ambient: 0.40,
                road_albedo_scale: 0.68,
                specular_boost: 1.8,
                wetness: 0.55,
            },
            WeatherPreset::MidRainNoon => WeatherParams {
                sky_color: [0.47, 0.52, 0.58],
                sun_dir: Vec3::new(0.3, 0.2, 0.93),
                sun_intensity: 0.30,
                ambient: 0.38,
                road_albedo_scale: 0.60,
                specular_boost: 2.2,
                wetness: 0.75,
            },
            WeatherPreset::HardRainNoon => WeatherParams {
                sky_color: [0.40, 0.44, 0.50],
                sun_dir: Vec3::new(0.3, 0.2, 0.93),
                sun_intensity: 0.22,
                ambient: 0.35,
                road_albedo_scale: 0.52,
                specular_boost: 2.6,
                wetness: 1.0,
            },
            WeatherPreset::SoftRainNoon => WeatherParams {
                sky_color: [0.52, 0.57, 0.63],
                sun_dir: Vec3::new(0.3, 0.2, 0.93),
                sun_intensity: 0.38,
                ambient: 0.40,
                road_albedo_scale: 0.66,
                specular_boost: 2.0,
                wetness: 0.6,
            },
            WeatherPreset::ClearSunset => WeatherParams {
                sky_color: [0.89, 0.60, 0.34],
                sun_dir: Vec3::new(0.9, 0.1, 0.25),
                sun_intensity: 0.60,
                ambient: 0.24,
                road_albedo_scale: 1.0,
                specular_boost: 1.1,
                wetness: 0.0,
            },
        }
    }
}

/// Lighting and surface modifiers derived from a preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherParams {
    pub sky_color: [f32; 3],
    /// Direction toward the sun, normalized at use.
    pub sun_dir: Vec3,
    pub sun_intensity: f32,
    pub ambient: f32,
    /// Wet roads read darker.
    pub road_albedo_scale: f32,
    /// Wet surfaces read shinier; multiplies base specular.
    pub specular_boost: f32,
    /// 0 dry to 1 soaked, folded into roughness.
    pub wetness: f32,
}
