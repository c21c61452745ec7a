//! Finite diamond-lattice domain with a substitutional donor.
//!
//! Sites live on an integer grid in units of a/4 with the box corner at the
//! origin. Sublattice A holds the fcc points (all coordinates even, sum ≡ 0
//! mod 4) and sublattice B the points displaced by (1,1,1). The box is
//! half-open, `[0, L)` along each axis, and atoms are ordered
//! lexicographically by their (z, y, x) grid index.

use crate::crystal::CrystalSpec;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Bond vectors from an A site to its four B neighbours, in units of a/4.
pub const BOND_VECTORS: [[i32; 3]; 4] = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];

pub const NO_NEIGHBOR: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    HardWall,
}

/// A truncating surface: one face of the box, at `depth` from the donor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interface {
    /// Outward normal of the face, one of ±x̂, ±ŷ, ±ẑ.
    pub normal: [f64; 3],
    /// Distance from the donor to the face, nm.
    pub depth: f64,
}

impl Interface {
    /// (axis, +1 or −1) of the face normal.
    pub fn axis(&self) -> Option<(usize, f64)> {
        let mut found = None;
        for k in 0..3 {
            let c = self.normal[k];
            if (c.abs() - 1.0).abs() < 1e-12 {
                found = Some((k, c.signum()));
            } else if c.abs() > 1e-12 {
                return None;
            }
        }
        found
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceGeometry {
    /// Box edge lengths, nm.
    pub box_extent: [f64; 3],
    /// Donor position relative to the box corner, nm; must be a lattice site.
    pub donor_position: [f64; 3],
    #[serde(default)]
    pub interface: Option<Interface>,
    #[serde(default)]
    pub boundary: Boundary,
}

impl DeviceGeometry {
    /// Cube of `cells` conventional cells plus a/8 slack, with the donor on
    /// the central A site. The slack keeps the box symmetric about the donor,
    /// so the cluster has the full tetrahedral site symmetry.
    pub fn centered_cube(cells: u32, lattice_constant: f64) -> Self {
        Self::centered_box([cells; 3], lattice_constant).expect("centered cube needs an even number of cells")
    }

    /// [`centered_cube`](Self::centered_cube) with independent cell counts per axis.
    pub fn centered_box(cells: [u32; 3], lattice_constant: f64) -> Result<Self> {
        if cells.iter().any(|&c| c == 0 || c % 2 != 0) {
            return Err(Error::InvalidGeometry(format!("centered box needs even, nonzero cell counts, got {cells:?}")));
        }
        let a = lattice_constant;
        Ok(DeviceGeometry {
            box_extent: cells.map(|c| c as f64 * a + a / 8.0),
            donor_position: cells.map(|c| (c / 2) as f64 * a),
            interface: None,
            boundary: Boundary::HardWall,
        })
    }

    /// Box whose `+normal` face sits `depth` from the donor (rounded to the
    /// nearest fcc site), with lateral extents centred on the donor.
    ///
    /// `cells` gives the box size in conventional cells along x, y, z.
    pub fn with_interface(cells: [u32; 3], lattice_constant: f64, normal_axis: usize, depth: f64) -> Result<Self> {
        let a = lattice_constant;
        let mut extent = [0.0; 3];
        let mut donor = [0.0; 3];
        for k in 0..3 {
            extent[k] = cells[k] as f64 * a + a / 8.0;
            donor[k] = (cells[k] / 2) as f64 * a;
        }
        // donor coordinate along the normal: multiple of a (fcc site stays valid
        // because the other two coordinates are multiples of a too)
        let along = ((extent[normal_axis] - depth) / a).round() * a;
        if along <= 0.0 || along >= extent[normal_axis] {
            return Err(Error::InvalidGeometry(format!("depth {depth} nm does not fit the box")));
        }
        donor[normal_axis] = along;
        let mut normal = [0.0; 3];
        normal[normal_axis] = 1.0;
        Ok(DeviceGeometry {
            box_extent: extent,
            donor_position: donor,
            interface: Some(Interface { normal, depth: extent[normal_axis] - along }),
            boundary: Boundary::HardWall,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..3 {
            if !(self.box_extent[k] > 0.0) || !self.donor_position[k].is_finite() {
                return Err(Error::InvalidGeometry("box extent and donor position must be finite and positive".into()));
            }
            if self.donor_position[k] <= 0.0 || self.donor_position[k] >= self.box_extent[k] {
                return Err(Error::DonorOutsideBox);
            }
        }
        if let Some(iface) = &self.interface {
            let (axis, sign) = iface
                .axis()
                .ok_or_else(|| Error::InvalidGeometry("interface normal must be a box face normal".into()))?;
            if !(iface.depth > 0.0) {
                return Err(Error::InvalidGeometry("donor depth must be positive".into()));
            }
            let face_distance = if sign > 0.0 {
                self.box_extent[axis] - self.donor_position[axis]
            } else {
                self.donor_position[axis]
            };
            if (face_distance - iface.depth).abs() > 1e-6 {
                return Err(Error::InvalidGeometry(format!(
                    "donor depth {} nm does not match the donor-to-face distance {face_distance} nm",
                    iface.depth
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    /// Direction cosines of the bond from the atom to this neighbour.
    pub cosines: [f64; 3],
    /// Which of the four tetrahedral bonds (index into [`BOND_VECTORS`]).
    pub bond: usize,
}

#[derive(Debug, Clone)]
pub struct AtomLattice {
    pub lattice_constant: f64,
    pub species_name: String,
    /// Grid coordinates in units of a/4.
    pub grid: Vec<[i32; 3]>,
    /// Cartesian positions, nm.
    pub positions: Vec<[f64; 3]>,
    /// 0 for sublattice A, 1 for B.
    pub sublattice: Vec<u8>,
    /// Neighbour index per tetrahedral bond slot, or [`NO_NEIGHBOR`].
    pub bonds: Vec<[u32; 4]>,
    pub donor: usize,
    pub geometry: DeviceGeometry,
}

impl AtomLattice {
    pub fn atom_count(&self) -> usize {
        self.positions.len()
    }

    /// Bond vector (units of a/4) of slot `k` for an atom on `sublattice`.
    pub fn bond_vector(sublattice: u8, k: usize) -> [i32; 3] {
        let v = BOND_VECTORS[k];
        if sublattice == 0 {
            v
        } else {
            [-v[0], -v[1], -v[2]]
        }
    }

    pub fn neighbors(&self, atom: usize) -> Vec<Neighbor> {
        let s = 1.0 / 3f64.sqrt();
        (0..4)
            .filter(|&k| self.bonds[atom][k] != NO_NEIGHBOR)
            .map(|k| {
                let v = Self::bond_vector(self.sublattice[atom], k);
                Neighbor {
                    index: self.bonds[atom][k] as usize,
                    cosines: [v[0] as f64 * s, v[1] as f64 * s, v[2] as f64 * s],
                    bond: k,
                }
            })
            .collect()
    }

    pub fn neighbor_count(&self, atom: usize) -> usize {
        self.bonds[atom].iter().filter(|&&b| b != NO_NEIGHBOR).count()
    }

    /// Species label of an atom: the donor is `P`.
    pub fn species(&self, atom: usize) -> &str {
        if atom == self.donor {
            "P"
        } else {
            &self.species_name
        }
    }

    /// Position relative to the donor, nm.
    pub fn displacement(&self, atom: usize) -> [f64; 3] {
        let p = self.positions[atom];
        let d = self.positions[self.donor];
        [p[0] - d[0], p[1] - d[1], p[2] - d[2]]
    }
}

fn is_site(g: [i32; 3]) -> Option<u8> {
    let [i, j, k] = g;
    let sum = (i + j + k).rem_euclid(4);
    if i.rem_euclid(2) == 0 && j.rem_euclid(2) == 0 && k.rem_euclid(2) == 0 && sum == 0 {
        Some(0)
    } else if i.rem_euclid(2) == 1 && j.rem_euclid(2) == 1 && k.rem_euclid(2) == 1 && sum == 3 {
        Some(1)
    } else {
        None
    }
}

/// Number of grid points `i ≥ 0` with `i·a/4 < extent`.
fn grid_count(extent: f64, quarter: f64) -> i32 {
    let x = extent / quarter;
    let n = x.ceil() as i32;
    // a site exactly on the far face is outside the half-open box
    if (x - x.round()).abs() < 1e-9 {
        x.round() as i32
    } else {
        n
    }
}

fn nearest_site(pos: [f64; 3], quarter: f64) -> [i32; 3] {
    let c = [(pos[0] / quarter).round() as i32, (pos[1] / quarter).round() as i32, (pos[2] / quarter).round() as i32];
    let mut best = c;
    let mut best_d = f64::INFINITY;
    for dx in -2..=2 {
        for dy in -2..=2 {
            for dz in -2..=2 {
                let g = [c[0] + dx, c[1] + dy, c[2] + dz];
                if is_site(g).is_none() {
                    continue;
                }
                let d: f64 = (0..3).map(|k| (g[k] as f64 * quarter - pos[k]).powi(2)).sum();
                if d < best_d {
                    best_d = d;
                    best = g;
                }
            }
        }
    }
    best
}

/// Enumerates all diamond sites inside the box and wires up nearest neighbours.
pub fn build_lattice(geometry: &DeviceGeometry, crystal: &CrystalSpec) -> Result<AtomLattice> {
    let a = crystal.lattice_constant;
    for k in 0..3 {
        // at least one conventional cell
        if geometry.box_extent[k] < a - 1e-9 {
            return Err(Error::BoxTooSmall { axis: k, extent: geometry.box_extent[k], min: a });
        }
    }
    geometry.validate()?;
    let quarter = a / 4.0;

    let donor_grid = nearest_site(geometry.donor_position, quarter);
    let offset: f64 = (0..3)
        .map(|k| (donor_grid[k] as f64 * quarter - geometry.donor_position[k]).powi(2))
        .sum::<f64>()
        .sqrt();
    if offset > 1e-6 {
        return Err(Error::DonorOffSite {
            given: geometry.donor_position,
            nearest: [0, 1, 2].map(|k| donor_grid[k] as f64 * quarter),
        });
    }

    let n = [0, 1, 2].map(|k| grid_count(geometry.box_extent[k], quarter));
    if (0..3).any(|k| donor_grid[k] <= 0 || donor_grid[k] >= n[k]) {
        return Err(Error::DonorOutsideBox);
    }

    let cells = n[0] as usize * n[1] as usize * n[2] as usize;
    let mut lookup = vec![NO_NEIGHBOR; cells];
    let flat = |g: [i32; 3]| -> usize { ((g[2] * n[1] + g[1]) * n[0] + g[0]) as usize };

    let mut grid = Vec::new();
    let mut sublattice = Vec::new();
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                if let Some(s) = is_site([i, j, k]) {
                    lookup[flat([i, j, k])] = grid.len() as u32;
                    grid.push([i, j, k]);
                    sublattice.push(s);
                }
            }
        }
    }

    let inside = |g: [i32; 3]| (0..3).all(|k| g[k] >= 0 && g[k] < n[k]);
    let bonds: Vec<[u32; 4]> = grid
        .iter()
        .zip(&sublattice)
        .map(|(&g, &s)| {
            let mut b = [NO_NEIGHBOR; 4];
            for (k, slot) in b.iter_mut().enumerate() {
                let v = AtomLattice::bond_vector(s, k);
                let q = [g[0] + v[0], g[1] + v[1], g[2] + v[2]];
                if inside(q) {
                    *slot = lookup[flat(q)];
                }
            }
            b
        })
        .collect();

    // neighbour symmetry: slot k of i points to j iff slot k of j points back to i
    for (i, b) in bonds.iter().enumerate() {
        for &j in b.iter().filter(|&&j| j != NO_NEIGHBOR) {
            assert!(bonds[j as usize].contains(&(i as u32)), "asymmetric neighbour relation {i} -> {j}");
        }
    }

    let positions = grid.iter().map(|g| g.map(|c| c as f64 * quarter)).collect();
    let donor = lookup[flat(donor_grid)] as usize;

    Ok(AtomLattice {
        lattice_constant: a,
        species_name: crystal.species_name.clone(),
        grid,
        positions,
        sublattice,
        bonds,
        donor,
        geometry: geometry.clone(),
    })
}

/// Atoms with fewer than four neighbours inside the box.
pub fn surface_atoms(lattice: &AtomLattice) -> Vec<usize> {
    (0..lattice.atom_count()).filter(|&i| lattice.neighbor_count(i) < 4).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn si() -> CrystalSpec {
        CrystalSpec::silicon()
    }

    /// Independent enumeration: fcc points plus basis, by brute force over
    /// conventional cells, counted with a half-open box test.
    fn brute_force_count(extent: [f64; 3], a: f64) -> usize {
        let fcc = [[0.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];
        let basis = [[0.0, 0.0, 0.0], [0.25, 0.25, 0.25]];
        let mut count = 0;
        let cells = [0, 1, 2].map(|k| (extent[k] / a).ceil() as i32 + 1);
        for cx in 0..cells[0] {
            for cy in 0..cells[1] {
                for cz in 0..cells[2] {
                    for f in &fcc {
                        for b in &basis {
                            let p = [
                                (cx as f64 + f[0] + b[0]) * a,
                                (cy as f64 + f[1] + b[1]) * a,
                                (cz as f64 + f[2] + b[2]) * a,
                            ];
                            if (0..3).all(|k| p[k] < extent[k] - 1e-9 * a) {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn one_conventional_cell_has_eight_atoms() {
        let a = 0.5431;
        let g = DeviceGeometry {
            box_extent: [a; 3],
            donor_position: [0.25 * a; 3],
            interface: None,
            boundary: Boundary::HardWall,
        };
        let lat = build_lattice(&g, &si()).unwrap();
        assert_eq!(lat.atom_count(), 8);
        // only the B site at a/4·(1,1,1) has all four neighbours inside the cell
        let full: Vec<_> = (0..8).filter(|&i| lat.neighbor_count(i) == 4).collect();
        assert_eq!(full, vec![lat.donor]);
        assert_eq!(lat.grid[lat.donor], [1, 1, 1]);
        assert_eq!(surface_atoms(&lat).len(), 7);
    }

    #[test]
    fn eight_nm_cube_matches_enumerator() {
        let a = si().lattice_constant;
        let extent = [8.1; 3];
        // donor near the centre: 7 cells
        let g = DeviceGeometry { box_extent: extent, donor_position: [7.0 * a; 3], interface: None, boundary: Boundary::HardWall };
        let lat = build_lattice(&g, &si()).unwrap();
        let want = brute_force_count(extent, a);
        assert_eq!(lat.atom_count(), want);
        assert_eq!(want, 27_000);
        let v = 8.1f64.powi(3);
        let ideal = 8.0 * v / a.powi(3);
        assert!((lat.atom_count() as f64 / ideal - 1.0).abs() < 0.05);
    }

    #[test]
    fn bulk_atoms_have_tetrahedral_bonds() {
        let g = DeviceGeometry::centered_cube(4, si().lattice_constant);
        let lat = build_lattice(&g, &si()).unwrap();
        let bond = si().bond_length();
        for i in 0..lat.atom_count() {
            let nb = lat.neighbors(i);
            if nb.len() < 4 {
                continue;
            }
            let mut sum = [0.0; 3];
            for n in &nb {
                let p = lat.positions[n.index];
                let q = lat.positions[i];
                let dist = (0..3).map(|k| (p[k] - q[k]).powi(2)).sum::<f64>().sqrt();
                assert!((dist - bond).abs() < 1e-9);
                for k in 0..3 {
                    sum[k] += n.cosines[k];
                }
            }
            assert!(sum.iter().all(|s| s.abs() < 1e-12));
        }
    }

    #[test]
    fn off_site_donor_reports_nearest() {
        let a = si().lattice_constant;
        let g = DeviceGeometry {
            box_extent: [4.0 * a; 3],
            donor_position: [2.0 * a + 0.01, 2.0 * a, 2.0 * a],
            interface: None,
            boundary: Boundary::HardWall,
        };
        match build_lattice(&g, &si()) {
            Err(Error::DonorOffSite { nearest, .. }) => {
                assert!((nearest[0] - 2.0 * a).abs() < 1e-12);
            }
            other => panic!("expected off-site rejection, got {other:?}"),
        }
    }

    #[test]
    fn small_box_rejected() {
        let a = si().lattice_constant;
        let g = DeviceGeometry {
            box_extent: [0.5 * a, 4.0 * a, 4.0 * a],
            donor_position: [0.25 * a; 3],
            interface: None,
            boundary: Boundary::HardWall,
        };
        assert!(matches!(build_lattice(&g, &si()), Err(Error::BoxTooSmall { axis: 0, .. })));
    }

    #[test]
    fn donor_outside_rejected() {
        let a = si().lattice_constant;
        let g = DeviceGeometry {
            box_extent: [2.0 * a; 3],
            donor_position: [3.0 * a; 3],
            interface: None,
            boundary: Boundary::HardWall,
        };
        assert!(matches!(build_lattice(&g, &si()), Err(Error::DonorOutsideBox)));
    }

    #[test]
    fn surface_set_matches_recount() {
        let a = si().lattice_constant;
        let g = DeviceGeometry {
            box_extent: [4.0 * a; 3],
            donor_position: [2.0 * a; 3],
            interface: None,
            boundary: Boundary::HardWall,
        };
        let lat = build_lattice(&g, &si()).unwrap();
        // recount from positions alone
        let bond = si().bond_length();
        let recount: Vec<usize> = (0..lat.atom_count())
            .filter(|&i| {
                let p = lat.positions[i];
                let n = lat
                    .positions
                    .iter()
                    .filter(|q| ((0..3).map(|k| (q[k] - p[k]).powi(2)).sum::<f64>().sqrt() - bond).abs() < 1e-6)
                    .count();
                n < 4
            })
            .collect();
        assert_eq!(surface_atoms(&lat), recount);
    }

    #[test]
    fn interface_face_is_surface() {
        let a = si().lattice_constant;
        let g = DeviceGeometry::with_interface([4, 6, 4], a, 1, 1.5).unwrap();
        let lat = build_lattice(&g, &si()).unwrap();
        let surf = surface_atoms(&lat);
        let top = lat.grid.iter().map(|g| g[1]).max().unwrap();
        for (i, gr) in lat.grid.iter().enumerate() {
            if gr[1] == top {
                assert!(surf.contains(&i));
            }
        }
        let depth = g.interface.unwrap().depth;
        assert!((depth - (g.box_extent[1] - lat.positions[lat.donor][1])).abs() < 1e-12);
    }

    #[test]
    fn ordering_is_zyx_lexicographic_and_deterministic() {
        let g = DeviceGeometry::centered_cube(2, si().lattice_constant);
        let l1 = build_lattice(&g, &si()).unwrap();
        let l2 = build_lattice(&g, &si()).unwrap();
        assert_eq!(l1.grid, l2.grid);
        for w in l1.grid.windows(2) {
            assert!((w[0][2], w[0][1], w[0][0]) < (w[1][2], w[1][1], w[1][0]));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn neighbor_relation_symmetric(nx in 1u32..4, ny in 1u32..4, nz in 1u32..4) {
            let a = si().lattice_constant;
            let g = DeviceGeometry {
                box_extent: [nx as f64 * a + 0.1, ny as f64 * a + 0.2, nz as f64 * a + 0.05],
                donor_position: [0.25 * a; 3],
                interface: None,
                boundary: Boundary::HardWall,
            };
            let lat = build_lattice(&g, &si()).unwrap();
            for i in 0..lat.atom_count() {
                for n in lat.neighbors(i) {
                    prop_assert!(lat.neighbors(n.index).iter().any(|m| m.index == i));
                }
            }
        }
    }
}
