//! Scenario configuration: a TOML document naming the surface, the point
//! pair, solver settings, the analyses to run and the outputs to write.

use serde::{Deserialize, Serialize};

use crate::distance::DistanceSettings;
use crate::error::{Error, Result};
use crate::mediatrix::TracerSettings;
use crate::surface::{ChartPoint, Surface, SurfaceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    /// Directional derivative of distance against finite differences.
    DirectionalDerivative,
    /// Bisector-ray residual trend at singular points.
    RayResidual,
    /// Spoke convergence at every traced point.
    Linearizability,
    /// Jordan-wedge curvature identity.
    GaussBonnet,
    /// Sum of deficiencies against the total curvature bound.
    DeficiencyBudget,
    /// Local curve inside the pre-wedges.
    WedgeContainment,
    /// Corrector travel against the projection bound.
    ProjectionBound,
    /// Hausdorff distance to the bisecting great circle.
    SphereOracle,
    /// Spacing, simplicity, residual and separation of the polyline.
    CurveStructure,
}

impl AnalysisKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::DirectionalDerivative => "directional_derivative",
            AnalysisKind::RayResidual => "ray_residual",
            AnalysisKind::Linearizability => "linearizability",
            AnalysisKind::GaussBonnet => "gauss_bonnet",
            AnalysisKind::DeficiencyBudget => "deficiency_budget",
            AnalysisKind::WedgeContainment => "wedge_containment",
            AnalysisKind::ProjectionBound => "projection_bound",
            AnalysisKind::SphereOracle => "sphere_oracle",
            AnalysisKind::CurveStructure => "curve_structure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewProjection {
    /// Longitude across, profile parameter down.
    #[default]
    ChartPlane,
    #[serde(rename = "orthographic_3d")]
    Orthographic3d,
}

/// Parameters of the analysis suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisParams {
    pub derivative_samples: usize,
    /// Minimum distance of derivative samples from the source and the poles.
    pub derivative_margin: f64,
    pub derivative_tol: f64,
    pub ray_residual_grid: Vec<f64>,
    pub lin_grid: Vec<f64>,
    pub lin_tol: f64,
    pub gb_tol: f64,
    /// Deficiencies at or below this are counted as numerical noise.
    pub noise_floor: f64,
    pub curvature_resolution: usize,
    pub projection_samples: usize,
    /// Largest geodesic offset of perturbed points from the curve.
    pub projection_offset: f64,
    pub projection_slack: f64,
    /// Containment radius; half the injectivity bound when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wedge_rho: Option<f64>,
    pub hausdorff_tol: f64,
    pub length_tol: f64,
    pub figure: ViewProjection,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            derivative_samples: 100,
            derivative_margin: 0.1,
            derivative_tol: 1e-3,
            ray_residual_grid: vec![0.2, 0.1, 0.05, 0.025],
            lin_grid: vec![0.016, 0.008, 0.004, 0.002, 0.001],
            lin_tol: 2e-2,
            gb_tol: 5e-3,
            noise_floor: 5e-3,
            curvature_resolution: 512,
            projection_samples: 200,
            projection_offset: 0.05,
            projection_slack: 1e-6,
            wedge_rho: None,
            hausdorff_tol: 1e-3,
            length_tol: 1e-2,
            figure: ViewProjection::ChartPlane,
        }
    }
}

fn all_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Json, OutputKind::Csv, OutputKind::Svg]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Seed for every random sample drawn by the analyses.
    #[serde(default)]
    pub seed: u64,
    pub surface: SurfaceSpec,
    pub p: ChartPoint,
    pub q: ChartPoint,
    #[serde(default)]
    pub tracer: TracerSettings,
    #[serde(default)]
    pub distance: DistanceSettings,
    #[serde(default)]
    pub analyses: Vec<AnalysisKind>,
    #[serde(default = "all_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub analysis: AnalysisParams,
}

const BUNDLED: [(&str, &str); 6] = [
    ("sphere_generic", include_str!("../scenarios/sphere_generic.toml")),
    ("sphere_poles", include_str!("../scenarios/sphere_poles.toml")),
    ("cigar_poles", include_str!("../scenarios/cigar_poles.toml")),
    ("cigar_one_bump", include_str!("../scenarios/cigar_one_bump.toml")),
    ("cigar_three_bumps", include_str!("../scenarios/cigar_three_bumps.toml")),
    ("spheroid_generic", include_str!("../scenarios/spheroid_generic.toml")),
];

/// Names and TOML sources of the bundled scenarios.
pub fn bundled() -> impl Iterator<Item = (&'static str, &'static str)> {
    BUNDLED.iter().copied()
}

pub fn bundled_source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

fn positive_count(field: &str, value: usize) -> Result<()> {
    if value > 0 {
        Ok(())
    } else {
        Err(Error::config(field, "must be at least 1"))
    }
}

fn decreasing_grid(field: &str, grid: &[f64], max: f64) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::config(field, "needs at least two values"));
    }
    for (i, &t) in grid.iter().enumerate() {
        positive(&format!("{field}[{i}]"), t)?;
        if t > max {
            return Err(Error::config(
                format!("{field}[{i}]"),
                format!("{t} exceeds half the injectivity bound {max}"),
            ));
        }
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::config(field, "must be strictly decreasing"));
    }
    Ok(())
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| text[..s.start].lines().count().to_string())
                .map(|line| format!("line {line}"))
                .unwrap_or_else(|| "document".into());
            Error::config(field, e.message().to_string())
        })
    }

    pub fn bundled(name: &str) -> Result<Self> {
        let text = bundled_source(name)
            .ok_or_else(|| Error::config("scenario", format!("no bundled scenario named {name:?}")))?;
        Scenario::from_toml(text)
    }

    /// Builds the surface and checks every constraint that does not need a
    /// distance field.
    pub fn validate(&self) -> Result<Surface> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        let surface = Surface::new(self.surface.clone()).map_err(|e| Error::config("surface", e.to_string()))?;
        for (field, x) in [("p", &self.p), ("q", &self.q)] {
            if !surface.in_domain(x) {
                return Err(Error::config(field, format!("{x:?} lies outside its chart")));
            }
        }
        if (surface.embed(&self.p) - surface.embed(&self.q)).norm() < 1e-9 {
            return Err(Error::config("q", "p and q must be distinct points"));
        }
        let t = &self.tracer;
        positive("tracer.step", t.step)?;
        positive("tracer.tol_f", t.tol_f)?;
        positive("tracer.beta_min", t.beta_min)?;
        positive("tracer.deficiency_threshold", t.deficiency_threshold)?;
        positive("tracer.wedge_slack", t.wedge_slack)?;
        positive_count("tracer.max_points", t.max_points)?;
        let inj = surface.injectivity_bound();
        if t.step > inj / 20.0 {
            return Err(Error::config(
                "tracer.step",
                format!("{} exceeds injectivity_bound/20 = {}", t.step, inj / 20.0),
            ));
        }
        let d = &self.distance;
        positive_count("distance.n_fan", d.n_fan)?;
        positive("distance.rel_tol_min", d.rel_tol_min)?;
        positive("distance.tol_hit", d.tol_hit)?;
        positive("distance.cluster_gap", d.cluster_gap)?;
        positive("distance.h_cover", d.h_cover)?;
        if let Some(len) = d.max_length {
            positive("distance.max_length", len)?;
        }
        if let Some(step) = d.step {
            positive("distance.step", step)?;
        }
        let a = &self.analysis;
        positive_count("analysis.derivative_samples", a.derivative_samples)?;
        positive("analysis.derivative_margin", a.derivative_margin)?;
        positive("analysis.derivative_tol", a.derivative_tol)?;
        decreasing_grid("analysis.ray_residual_grid", &a.ray_residual_grid, inj / 2.0)?;
        decreasing_grid("analysis.lin_grid", &a.lin_grid, inj / 2.0)?;
        positive("analysis.lin_tol", a.lin_tol)?;
        positive("analysis.gb_tol", a.gb_tol)?;
        positive("analysis.noise_floor", a.noise_floor)?;
        positive_count("analysis.curvature_resolution", a.curvature_resolution)?;
        positive_count("analysis.projection_samples", a.projection_samples)?;
        positive("analysis.projection_offset", a.projection_offset)?;
        positive("analysis.projection_slack", a.projection_slack)?;
        if let Some(rho) = a.wedge_rho {
            positive("analysis.wedge_rho", rho)?;
            if rho > inj / 2.0 {
                return Err(Error::config(
                    "analysis.wedge_rho",
                    "exceeds half the injectivity bound",
                ));
            }
        }
        positive("analysis.hausdorff_tol", a.hausdorff_tol)?;
        positive("analysis.length_tol", a.length_tol)?;
        Ok(surface)
    }

    pub fn wedge_rho(&self, surface: &Surface) -> f64 {
        self.analysis.wedge_rho.unwrap_or(0.5 * surface.injectivity_bound())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_parse_and_validate() {
        let names: Vec<&str> = bundled().map(|(n, _)| n).collect();
        assert_eq!(names.len(), 6);
        for name in names {
            let s = Scenario::bundled(name).unwrap();
            assert_eq!(s.name, name);
            s.validate().unwrap();
        }
    }

    #[test]
    fn equal_points_are_rejected() {
        let mut s = Scenario::bundled("cigar_poles").unwrap();
        s.q = s.p;
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains('q'), "{err}");
    }

    #[test]
    fn oversized_step_names_the_field() {
        let mut s = Scenario::bundled("sphere_generic").unwrap();
        s.tracer.step = 1.0;
        assert!(s.validate().unwrap_err().to_string().contains("tracer.step"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("bogus = 1\n{}", bundled_source("sphere_poles").unwrap());
        assert!(Scenario::from_toml(&text).is_err());
        let text = format!("{}\nbogus = 1\n", bundled_source("sphere_poles").unwrap());
        assert!(Scenario::from_toml(&text).is_err());
    }

    #[test]
    fn partial_settings_tables_use_defaults() {
        let s = Scenario::bundled("cigar_one_bump").unwrap();
        assert_eq!(s.distance.n_fan, 4096);
        assert_eq!(s.distance.rel_tol_min, DistanceSettings::default().rel_tol_min);
        assert_eq!(s.tracer, TracerSettings::default());
    }
}
