//! Problem data: customers, candidate terminal sites, demands and unit costs.
//!
//! Costs are held as explicit matrices. Instances built from coordinates get
//! Euclidean costs and carry `triangle_ok = true`; instances with directly
//! supplied costs make no metric assumption.

use std::fmt;

use crate::error::{Error, Result};

/// Rail discount used when none is given.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Relative tolerance for checks against coordinate-derived distances.
const METRIC_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    pub customers: Vec<Point>,
    pub sites: Vec<Point>,
}

/// Euclidean road, access and inter-terminal cost matrices.
pub fn build_costs_from_coordinates(
    customers: &[Point],
    sites: &[Point],
) -> (Matrix, Matrix, Matrix) {
    let road = Matrix::from_fn(customers.len(), customers.len(), |i, j| {
        if i == j {
            0.0
        } else {
            customers[i].distance(&customers[j])
        }
    });
    let access = Matrix::from_fn(customers.len(), sites.len(), |i, k| {
        customers[i].distance(&sites[k])
    });
    let inter = Matrix::from_fn(sites.len(), sites.len(), |k, m| {
        if k == m {
            0.0
        } else {
            sites[k].distance(&sites[m])
        }
    });
    (road, access, inter)
}

/// Ground data of one problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    coordinates: Option<Coordinates>,
    demand: Matrix,
    fixed_cost: Vec<f64>,
    capacity: Vec<f64>,
    alpha: f64,
    road_cost: Matrix,
    access_cost: Matrix,
    inter_cost: Matrix,
    triangle_ok: bool,
}

impl Instance {
    /// Builds an instance with Euclidean costs derived from the coordinates.
    pub fn from_coordinates(
        customers: Vec<Point>,
        sites: Vec<Point>,
        demand: Matrix,
        fixed_cost: Vec<f64>,
        capacity: Vec<f64>,
        alpha: f64,
    ) -> Result<Self> {
        let (road_cost, access_cost, inter_cost) = build_costs_from_coordinates(&customers, &sites);
        let inst = Self {
            coordinates: Some(Coordinates { customers, sites }),
            demand,
            fixed_cost,
            capacity,
            alpha,
            road_cost,
            access_cost,
            inter_cost,
            triangle_ok: true,
        };
        inst.check_dimensions()?;
        Ok(inst)
    }

    /// Builds an instance from explicit cost matrices. No triangle inequality
    /// is assumed.
    #[allow(clippy::too_many_arguments)]
    pub fn from_costs(
        demand: Matrix,
        fixed_cost: Vec<f64>,
        capacity: Vec<f64>,
        alpha: f64,
        road_cost: Matrix,
        access_cost: Matrix,
        inter_cost: Matrix,
    ) -> Result<Self> {
        let inst = Self {
            coordinates: None,
            demand,
            fixed_cost,
            capacity,
            alpha,
            road_cost,
            access_cost,
            inter_cost,
            triangle_ok: false,
        };
        inst.check_dimensions()?;
        Ok(inst)
    }

    /// Attaches coordinates to explicit costs, as read from a file carrying
    /// both. `triangle_ok` is set only when the costs are the Euclidean
    /// distances of the coordinates.
    pub fn with_coordinates(mut self, coords: Coordinates) -> Result<Self> {
        if coords.customers.len() != self.n() || coords.sites.len() != self.p() {
            return Err(Error::Dimension(format!(
                "coordinates give {} customers and {} sites, costs give {} and {}",
                coords.customers.len(),
                coords.sites.len(),
                self.n(),
                self.p()
            )));
        }
        self.coordinates = Some(coords);
        self.triangle_ok = self.metric_mismatch().is_none();
        Ok(self)
    }

    fn check_dimensions(&self) -> Result<()> {
        let n = self.demand.rows();
        let p = self.fixed_cost.len();
        let dim = |what: &str, r: usize, c: usize, m: &Matrix| -> Result<()> {
            if m.rows() != r || m.cols() != c {
                return Err(Error::Dimension(format!(
                    "{what} is {}x{}, expected {r}x{c}",
                    m.rows(),
                    m.cols()
                )));
            }
            Ok(())
        };
        dim("demand", n, n, &self.demand)?;
        dim("road_cost", n, n, &self.road_cost)?;
        dim("access_cost", n, p, &self.access_cost)?;
        dim("inter_cost", p, p, &self.inter_cost)?;
        if self.capacity.len() != p {
            return Err(Error::Dimension(format!(
                "capacity has {} entries, expected {p}",
                self.capacity.len()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.demand.rows()
    }

    pub fn p(&self) -> usize {
        self.fixed_cost.len()
    }

    pub fn coordinates(&self) -> Option<&Coordinates> {
        self.coordinates.as_ref()
    }

    pub fn demand(&self) -> &Matrix {
        &self.demand
    }

    pub fn fixed_cost(&self) -> &[f64] {
        &self.fixed_cost
    }

    pub fn capacity(&self) -> &[f64] {
        &self.capacity
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn road_cost(&self) -> &Matrix {
        &self.road_cost
    }

    pub fn access_cost(&self) -> &Matrix {
        &self.access_cost
    }

    pub fn inter_cost(&self) -> &Matrix {
        &self.inter_cost
    }

    /// True when costs are Euclidean, so the triangle inequality holds.
    pub fn triangle_ok(&self) -> bool {
        self.triangle_ok
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.values().iter().sum()
    }

    /// Cost of shipping everything by road.
    pub fn all_road_cost(&self) -> f64 {
        self.demand
            .values()
            .iter()
            .zip(self.road_cost.values())
            .map(|(q, c)| q * c)
            .sum()
    }

    /// Ordered customer pairs with positive demand, row-major.
    pub fn demand_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.demand.get(i, j) > 0.0)
            .collect()
    }

    /// Unit cost of shipping from customer `i` to customer `j` through
    /// terminals `k` then `m`: access leg, discounted rail leg, egress leg.
    pub fn intermodal_unit_cost(&self, i: usize, j: usize, k: usize, m: usize) -> Result<f64> {
        let check = |what, index, size| {
            if index >= size {
                Err(Error::IndexOutOfRange { what, index, size })
            } else {
                Ok(())
            }
        };
        check("customer i", i, self.n())?;
        check("customer j", j, self.n())?;
        check("site k", k, self.p())?;
        check("site m", m, self.p())?;
        Ok(self.route_cost(i, j, k, m))
    }

    #[inline]
    pub(crate) fn route_cost(&self, i: usize, j: usize, k: usize, m: usize) -> f64 {
        self.access_cost.get(i, k) + self.alpha * self.inter_cost.get(k, m) + self.access_cost.get(j, m)
    }

    fn metric_mismatch(&self) -> Option<Violation> {
        let coords = self.coordinates.as_ref()?;
        let (road, access, inter) = build_costs_from_coordinates(&coords.customers, &coords.sites);
        for (name, built, held) in [
            ("road_cost", &road, &self.road_cost),
            ("access_cost", &access, &self.access_cost),
            ("inter_cost", &inter, &self.inter_cost),
        ] {
            for r in 0..built.rows() {
                for c in 0..built.cols() {
                    let (a, b) = (built.get(r, c), held.get(r, c));
                    if (a - b).abs() > METRIC_RTOL * a.abs().max(1.0) {
                        return Some(Violation::CoordinateMismatch { matrix: name, row: r, col: c });
                    }
                }
            }
        }
        None
    }

    /// Lists every violated data invariant. An empty report means the
    /// instance is well formed.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let n = self.n();
        let p = self.p();

        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            v.push(Violation::Alpha(self.alpha));
        }
        if let Some(c) = &self.coordinates {
            if c.customers.iter().chain(&c.sites).any(|pt| !pt.x.is_finite() || !pt.y.is_finite()) {
                v.push(Violation::NonFiniteCoordinate);
            }
        }
        for i in 0..n {
            if self.demand.get(i, i) != 0.0 {
                v.push(Violation::DemandDiagonal(i));
            }
        }
        for (name, m) in [
            ("demand", &self.demand),
            ("road_cost", &self.road_cost),
            ("access_cost", &self.access_cost),
            ("inter_cost", &self.inter_cost),
        ] {
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    let x = m.get(r, c);
                    if !x.is_finite() || x < 0.0 {
                        v.push(Violation::BadEntry { matrix: name, row: r, col: c, value: x });
                    }
                }
            }
        }
        for (name, vec) in [("fixed_cost", &self.fixed_cost), ("capacity", &self.capacity)] {
            for (k, &x) in vec.iter().enumerate() {
                if !x.is_finite() || x < 0.0 {
                    v.push(Violation::BadEntry { matrix: name, row: k, col: 0, value: x });
                }
            }
        }
        for k in 0..p {
            if self.inter_cost.get(k, k) != 0.0 {
                v.push(Violation::InterDiagonal(k));
            }
            for m in (k + 1)..p {
                if self.inter_cost.get(k, m) != self.inter_cost.get(m, k) {
                    v.push(Violation::InterAsymmetric(k, m));
                }
            }
        }
        if self.triangle_ok {
            if let Some(mismatch) = self.metric_mismatch() {
                v.push(mismatch);
            }
        }
        ValidationReport { violations: v }
    }

    /// Returns the instance if valid, otherwise the report as an error.
    pub fn validated(&self) -> Result<&Self> {
        let report = self.validate();
        if report.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidInstance(report))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Alpha(f64),
    NonFiniteCoordinate,
    DemandDiagonal(usize),
    BadEntry {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    InterDiagonal(usize),
    InterAsymmetric(usize, usize),
    CoordinateMismatch {
        matrix: &'static str,
        row: usize,
        col: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Alpha(a) => write!(f, "alpha {a} outside (0, 1]"),
            Violation::NonFiniteCoordinate => write!(f, "non-finite coordinate"),
            Violation::DemandDiagonal(i) => write!(f, "nonzero demand diagonal at index {i}"),
            Violation::BadEntry { matrix, row, col, value } => {
                write!(f, "{matrix}[{row}][{col}] = {value} is negative or non-finite")
            }
            Violation::InterDiagonal(k) => write!(f, "nonzero inter_cost diagonal at index {k}"),
            Violation::InterAsymmetric(k, m) => {
                write!(f, "inter_cost not symmetric at ({k}, {m})")
            }
            Violation::CoordinateMismatch { matrix, row, col } => {
                write!(f, "{matrix}[{row}][{col}] differs from the coordinate distance")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_instance() -> Instance {
        // customers at x=0 and x=10, sites at x=2 and x=7
        let customers = vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0)];
        let sites = vec![Point::new(2.0, 0.0), Point::new(7.0, 0.0)];
        let demand = Matrix::from_rows(vec![vec![0.0, 5.0], vec![1.0, 0.0]]).unwrap();
        Instance::from_coordinates(customers, sites, demand, vec![1.0, 1.0], vec![10.0, 10.0], 1.0)
            .unwrap()
    }

    fn explicit(alpha: f64) -> Instance {
        let road = Matrix::from_rows(vec![vec![0.0, 9.0], vec![9.0, 0.0]]).unwrap();
        let access = Matrix::from_rows(vec![vec![2.0, 6.0], vec![5.0, 3.0]]).unwrap();
        let inter = Matrix::from_rows(vec![vec![0.0, 4.0], vec![4.0, 0.0]]).unwrap();
        let demand = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        Instance::from_costs(demand, vec![0.0; 2], vec![1.0; 2], alpha, road, access, inter).unwrap()
    }

    #[test]
    fn unit_cost_formula() {
        let inst = explicit(0.5);
        // c_ik = 2, c_km = 4, c_mj = 3
        assert_eq!(inst.intermodal_unit_cost(0, 1, 0, 1).unwrap(), 7.0);
    }

    #[test]
    fn unit_cost_same_terminal_drops_rail_leg() {
        let inst = explicit(0.5);
        assert_eq!(inst.intermodal_unit_cost(0, 1, 1, 1).unwrap(), 6.0 + 3.0);
    }

    #[test]
    fn unit_cost_collinear_alpha_one_equals_road() {
        let inst = line_instance();
        assert_eq!(inst.intermodal_unit_cost(0, 1, 0, 1).unwrap(), inst.road_cost().get(0, 1));
    }

    #[test]
    fn unit_cost_rejects_bad_index() {
        let inst = explicit(0.5);
        assert!(matches!(
            inst.intermodal_unit_cost(0, 1, 2, 0),
            Err(Error::IndexOutOfRange { what: "site k", index: 2, size: 2 })
        ));
    }

    #[test]
    fn euclidean_costs() {
        let customers = [Point::new(0.0, 0.0), Point::new(3.0, 4.0)];
        let sites = [Point::new(3.0, 4.0)];
        let (road, access, inter) = build_costs_from_coordinates(&customers, &sites);
        assert_eq!(road.get(0, 1), 5.0);
        assert_eq!(road.get(1, 0), 5.0);
        assert_eq!(access.get(1, 0), 0.0);
        assert_eq!(inter.get(0, 0), 0.0);
    }

    #[test]
    fn validate_clean() {
        assert!(line_instance().validate().is_empty());
        assert!(explicit(0.5).validate().is_empty());
    }

    #[test]
    fn validate_demand_diagonal() {
        let mut d = Matrix::zeros(3, 3);
        d.set(2, 2, 5.0);
        let inst = Instance::from_coordinates(
            vec![Point::new(0.0, 0.0); 3],
            vec![Point::new(1.0, 1.0)],
            d,
            vec![0.0],
            vec![0.0],
            0.5,
        )
        .unwrap();
        let report = inst.validate();
        assert_eq!(report.violations, vec![Violation::DemandDiagonal(2)]);
        assert_eq!(report.to_string(), "nonzero demand diagonal at index 2");
    }

    #[test]
    fn validate_asymmetric_inter_cost() {
        let inter = Matrix::from_rows(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 2.0],
            vec![1.0, 3.0, 0.0],
        ])
        .unwrap();
        let inst = Instance::from_costs(
            Matrix::zeros(1, 1),
            vec![0.0; 3],
            vec![0.0; 3],
            0.5,
            Matrix::zeros(1, 1),
            Matrix::zeros(1, 3),
            inter,
        )
        .unwrap();
        assert_eq!(inst.validate().violations, vec![Violation::InterAsymmetric(1, 2)]);
    }

    #[test]
    fn validate_alpha_zero_rejected() {
        let report = explicit(0.0).validate();
        assert_eq!(report.violations, vec![Violation::Alpha(0.0)]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let r = Instance::from_costs(
            Matrix::zeros(2, 2),
            vec![0.0; 2],
            vec![0.0; 3],
            0.5,
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 2),
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
    }
}
