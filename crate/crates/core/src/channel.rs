//! Channel between the primary panel and one secondary panel.
//!
//! Two models are provided: i.i.d. Rayleigh fading, and a single-ray
//! line-of-sight model between two wall-mounted grids of patch antennas.
//! Entry `(m, k)` of a [`ChannelMatrix`] is the gain from secondary antenna `k`
//! to primary antenna `m`; by reciprocity the reverse direction is the
//! transpose.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, Rotation3, Vector3};
use rand::Rng;

use crate::linalg::complex_gaussian_matrix;
use crate::{Error, Result, C64};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const UNIT_TOL: f64 = 1e-9;

/// Complex gain matrix `G`, `Mp × Ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<C64>,
    wavelength: Option<f64>,
}

impl ChannelMatrix {
    pub fn from_entries(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid("channel matrix must be non-empty"));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid("channel matrix has non-finite entries"));
        }
        Ok(ChannelMatrix {
            entries,
            wavelength: None,
        })
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn primary_antennas(&self) -> usize {
        self.entries.nrows()
    }

    pub fn secondary_antennas(&self) -> usize {
        self.entries.ncols()
    }

    /// Carrier wavelength in meters, for geometric channels.
    pub fn wavelength(&self) -> Option<f64> {
        self.wavelength
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.entries.norm_squared()
    }

    /// Rescales the matrix so that `‖G‖²_F = Mp·Ms`, the mean power of an
    /// i.i.d. `CN(0, 1)` channel of the same size.
    pub fn normalized_to_unit_mean_power(mut self) -> Result<Self> {
        let power = self.frobenius_norm_sqr();
        if power == 0.0 {
            return Err(Error::Degenerate(
                "cannot normalize an all-zero channel".into(),
            ));
        }
        let target = (self.entries.nrows() * self.entries.ncols()) as f64;
        self.entries *= C64::new((target / power).sqrt(), 0.0);
        Ok(self)
    }

    /// Writes the matrix row by row, each entry as a `re,im` pair.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in self.entries.row_iter() {
            let line = row
                .iter()
                .map(|z| format!("{},{}", z.re, z.im))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// i.i.d. `CN(0, 1)` channel, drawn column-major from `rng`.
pub fn rayleigh_channel<R: Rng + ?Sized>(
    mp: usize,
    ms: usize,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    if mp == 0 || ms == 0 {
        return Err(Error::invalid("channel dimensions must be at least 1"));
    }
    Ok(ChannelMatrix {
        entries: complex_gaussian_matrix(mp, ms, 1.0, rng),
        wavelength: None,
    })
}

/// `cos^q` patch element pattern with a front-to-back floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchAntennaParams {
    pub max_gain_dbi: f64,
    /// Exponent `q ≥ 0` of the `cos^q θ` main lobe.
    pub pattern_exponent: f64,
    /// Floor below the peak, in dB; `f64::INFINITY` means no back radiation.
    pub front_to_back_db: f64,
}

impl Default for PatchAntennaParams {
    fn default() -> Self {
        PatchAntennaParams {
            max_gain_dbi: 6.0,
            pattern_exponent: 2.0,
            front_to_back_db: 20.0,
        }
    }
}

impl PatchAntennaParams {
    pub fn isotropic() -> Self {
        PatchAntennaParams {
            max_gain_dbi: 0.0,
            pattern_exponent: 0.0,
            front_to_back_db: 0.0,
        }
    }

    pub fn max_gain_linear(&self) -> f64 {
        10f64.powf(self.max_gain_dbi / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.max_gain_dbi.is_finite() {
            return Err(Error::invalid("patch max gain must be finite"));
        }
        if !(self.pattern_exponent >= 0.0 && self.pattern_exponent.is_finite()) {
            return Err(Error::invalid(
                "patch pattern exponent must be finite and >= 0",
            ));
        }
        if !(self.front_to_back_db >= 0.0) {
            return Err(Error::invalid("patch front-to-back ratio must be >= 0 dB"));
        }
        Ok(())
    }
}

/// Linear power gain of a patch element with boresight `boresight` toward
/// `direction`: `G·max(cos^q θ, 10^(-FB/10))` in front, the floor behind.
pub fn patch_element_gain(
    direction: &Vector3<f64>,
    params: &PatchAntennaParams,
    boresight: &Vector3<f64>,
) -> Result<f64> {
    for (name, v) in [("direction", direction), ("boresight", boresight)] {
        if (v.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!(
                "{name} is not a unit vector (norm {})",
                v.norm()
            )));
        }
    }
    params.validate()?;
    let cos = direction.dot(boresight).clamp(-1.0, 1.0);
    let lobe = if cos > 0.0 {
        cos.powf(params.pattern_exponent)
    } else {
        0.0
    };
    let floor = 10f64.powf(-params.front_to_back_db / 10.0);
    Ok(params.max_gain_linear() * lobe.max(floor))
}

/// Antenna positions of one panel plus its boresight.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelGeometry {
    positions: Vec<Vector3<f64>>,
    boresight: Vector3<f64>,
    rows: usize,
    cols: usize,
}

impl PanelGeometry {
    pub fn new(
        positions: Vec<Vector3<f64>>,
        boresight: Vector3<f64>,
        rows: usize,
        cols: usize,
    ) -> Result<Self> {
        if rows * cols != positions.len() || positions.is_empty() {
            return Err(Error::invalid(format!(
                "{rows}x{cols} grid does not match {} antenna positions",
                positions.len()
            )));
        }
        if (boresight.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("panel boresight must be a unit vector"));
        }
        for (i, a) in positions.iter().enumerate() {
            if positions[..i].iter().any(|b| (a - b).norm() == 0.0) {
                return Err(Error::invalid("panel antenna positions must be distinct"));
            }
        }
        Ok(PanelGeometry {
            positions,
            boresight,
            rows,
            cols,
        })
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn boresight(&self) -> &Vector3<f64> {
        &self.boresight
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Applies a rigid motion (rotation about the origin) to the panel.
    pub fn rotated(&self, rotation: &Rotation3<f64>) -> Self {
        PanelGeometry {
            positions: self.positions.iter().map(|p| rotation * p).collect(),
            boresight: rotation * self.boresight,
            rows: self.rows,
            cols: self.cols,
        }
    }
}

/// Uniform `rows × cols` grid in the plane orthogonal to `wall_normal`,
/// centered at `center`. Rows run vertically (along the in-plane direction
/// closest to +z), columns horizontally; antenna `r·cols + c` sits at row `r`,
/// column `c`.
pub fn make_wall_panel(
    center: Vector3<f64>,
    wall_normal: Vector3<f64>,
    rows: usize,
    cols: usize,
    spacing: f64,
) -> Result<PanelGeometry> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(
            "panel grid needs at least one row and column",
        ));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid("antenna spacing must be positive"));
    }
    if (wall_normal.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::invalid("wall normal must be a unit vector"));
    }
    let normal = wall_normal.normalize();
    let up = Vector3::z();
    let horizontal = {
        let h = up.cross(&normal);
        if h.norm() < 1e-9 {
            Vector3::x()
        } else {
            h.normalize()
        }
    };
    let vertical = normal.cross(&horizontal);
    let r0 = (rows as f64 - 1.0) / 2.0;
    let c0 = (cols as f64 - 1.0) / 2.0;
    let positions = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| {
            center
                + vertical * ((r as f64 - r0) * spacing)
                + horizontal * ((c as f64 - c0) * spacing)
        })
        .collect();
    PanelGeometry::new(positions, normal, rows, cols)
}

/// Free-space single-ray channel between two panels:
/// `√(g_tx·g_rx) · λ/(4πd) · exp(−j2πd/λ)` for every antenna pair.
pub fn los_channel(
    primary: &PanelGeometry,
    secondary: &PanelGeometry,
    wavelength: f64,
    patch: &PatchAntennaParams,
) -> Result<ChannelMatrix> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::invalid("wavelength must be positive"));
    }
    patch.validate()?;
    let mut entries = DMatrix::zeros(primary.len(), secondary.len());
    for (m, p) in primary.positions().iter().enumerate() {
        for (k, s) in secondary.positions().iter().enumerate() {
            let ray = s - p;
            let d = ray.norm();
            if d == 0.0 {
                return Err(Error::invalid(format!(
                    "primary antenna {m} and secondary antenna {k} are co-located"
                )));
            }
            let toward_secondary = ray / d;
            let g_tx = patch_element_gain(&toward_secondary, patch, primary.boresight())?;
            let g_rx = patch_element_gain(&-toward_secondary, patch, secondary.boresight())?;
            let magnitude = (g_tx * g_rx).sqrt() * wavelength / (4.0 * PI * d);
            let cycles = d / wavelength;
            let phase = -2.0 * PI * (cycles - cycles.floor());
            entries[(m, k)] = C64::from_polar(magnitude, phase);
        }
    }
    Ok(ChannelMatrix {
        entries,
        wavelength: Some(wavelength),
    })
}

/// Most-square `rows × cols` factorization of `m` with `rows ≤ cols`.
pub fn near_square_grid(m: usize) -> (usize, usize) {
    let mut rows = (m as f64).sqrt().floor() as usize;
    while rows > 1 && !m.is_multiple_of(rows) {
        rows -= 1;
    }
    let rows = rows.max(1);
    (rows, m / rows)
}

/// Room scenario for the line-of-sight model: two wall-mounted panels.
#[derive(Debug, Clone, PartialEq)]
pub struct LosScene {
    /// Room extent along x, y, z in meters.
    pub room: [f64; 3],
    pub primary_center: [f64; 3],
    pub primary_normal: [f64; 3],
    pub secondary_center: [f64; 3],
    pub secondary_normal: [f64; 3],
    /// `(rows, cols)` of the primary grid.
    pub primary_grid: (usize, usize),
    pub secondary_grid: (usize, usize),
    /// Element spacing in carrier wavelengths.
    pub spacing_wavelengths: f64,
    pub carrier_hz: f64,
    pub patch: PatchAntennaParams,
    /// Rescale the generated channel to `‖G‖²_F = Mp·Ms`.
    pub normalize: bool,
}

impl LosScene {
    /// Default scene: a 100 m × 100 m × 10 m room, primary panel centered on
    /// the `x = 0` wall and secondary on the adjacent `y = 0` wall, both at
    /// 5 m height, half-wavelength grids at 3.5 GHz.
    pub fn adjacent_walls(mp: usize, ms: usize) -> Self {
        LosScene {
            room: [100.0, 100.0, 10.0],
            primary_center: [0.0, 50.0, 5.0],
            primary_normal: [1.0, 0.0, 0.0],
            secondary_center: [50.0, 0.0, 5.0],
            secondary_normal: [0.0, 1.0, 0.0],
            primary_grid: near_square_grid(mp),
            secondary_grid: near_square_grid(ms),
            spacing_wavelengths: 0.5,
            carrier_hz: 3.5e9,
            patch: PatchAntennaParams::default(),
            normalize: true,
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn validate(&self, mp: usize, ms: usize) -> Result<()> {
        if self.primary_grid.0 * self.primary_grid.1 != mp {
            return Err(Error::invalid(format!(
                "primary grid {}x{} does not hold {mp} antennas",
                self.primary_grid.0, self.primary_grid.1
            )));
        }
        if self.secondary_grid.0 * self.secondary_grid.1 != ms {
            return Err(Error::invalid(format!(
                "secondary grid {}x{} does not hold {ms} antennas",
                self.secondary_grid.0, self.secondary_grid.1
            )));
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::invalid("carrier frequency must be positive"));
        }
        if !(self.spacing_wavelengths > 0.0 && self.spacing_wavelengths.is_finite()) {
            return Err(Error::invalid("antenna spacing must be positive"));
        }
        if self.room.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::invalid("room dimensions must be positive"));
        }
        for (name, c) in [
            ("primary", self.primary_center),
            ("secondary", self.secondary_center),
        ] {
            if c.iter()
                .zip(self.room.iter())
                .any(|(x, r)| !(*x >= 0.0 && x <= r))
            {
                return Err(Error::invalid(format!(
                    "{name} panel center lies outside the room"
                )));
            }
        }
        for (name, n) in [
            ("primary", self.primary_normal),
            ("secondary", self.secondary_normal),
        ] {
            if Vector3::from(n).norm() < 1e-12 {
                return Err(Error::invalid(format!("{name} wall normal is zero")));
            }
        }
        self.patch.validate()
    }

    pub fn panels(&self) -> Result<(PanelGeometry, PanelGeometry)> {
        let spacing = self.spacing_wavelengths * self.wavelength();
        let primary = make_wall_panel(
            Vector3::from(self.primary_center),
            Vector3::from(self.primary_normal).normalize(),
            self.primary_grid.0,
            self.primary_grid.1,
            spacing,
        )?;
        let secondary = make_wall_panel(
            Vector3::from(self.secondary_center),
            Vector3::from(self.secondary_normal).normalize(),
            self.secondary_grid.0,
            self.secondary_grid.1,
            spacing,
        )?;
        Ok((primary, secondary))
    }

    pub fn channel(&self) -> Result<ChannelMatrix> {
        let (primary, secondary) = self.panels()?;
        let g = los_channel(&primary, &secondary, self.wavelength(), &self.patch)?;
        if self.normalize {
            g.normalized_to_unit_mean_power()
        } else {
            Ok(g)
        }
    }
}
