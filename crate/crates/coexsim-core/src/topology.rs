//! Multi-operator base-station layouts, device placement, and serving-cell
//! association. Cells are nearest-BS (Voronoi) regions with ties broken by
//! the lowest base-station id.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::geom::{Position, Rect};
use crate::radio::Channel;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
pub struct OperatorId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
pub struct BsId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
pub struct DeviceId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaseStation {
    pub id: BsId,
    pub operator_id: OperatorId,
    pub position: Position,
    /// Member of the shared RAN (accessible to all operators) as opposed to
    /// an exclusive-use site.
    pub shared: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum DeviceKind {
    Ue,
    Iot,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Device {
    pub id: DeviceId,
    pub kind: DeviceKind,
    pub operator_id: OperatorId,
    pub position: Position,
    pub tx_power_dbm: f64,
    pub channel: Option<Channel>,
    pub serving_bs: Option<BsId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub base_stations: Vec<BaseStation>,
    pub area: Rect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum Assignment {
    /// Interleave operators over a single lattice, site by site.
    Alternating,
    /// One full lattice per operator, offset by half the inter-site distance.
    PerOperatorOverlay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum AssociationMode {
    /// Nearest base station of the device's own operator.
    OwnOperator,
    /// Nearest among own-operator sites and all shared-RAN sites.
    AnyShared,
}

/// How devices are assigned to operators at placement time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum DeviceOperatorPolicy {
    /// Each device subscribes to the operator owning the cell it lands in.
    CellOwner,
    /// Subscriptions drawn uniformly over all operators, independent of
    /// location (devices are pre-assigned to an operator, not to a site).
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DevicePowerProfile {
    pub ue_tx_power_dbm: f64,
    pub iot_tx_power_dbm: f64,
}

impl Default for DevicePowerProfile {
    fn default() -> Self {
        DevicePowerProfile {
            ue_tx_power_dbm: 25.0,
            iot_tx_power_dbm: 20.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TopologyError {
    NoOperators,
    InvalidParameter(&'static str),
    EmptyTopology,
    /// Rejection sampling could not land inside the cell of this BS.
    CellSamplingFailed(BsId),
    /// No base station is eligible to serve the device.
    NoEligibleBs(DeviceId),
}

impl core::fmt::Display for TopologyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TopologyError::NoOperators => write!(f, "at least one operator is required"),
            TopologyError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            TopologyError::EmptyTopology => write!(f, "topology has no base stations"),
            TopologyError::CellSamplingFailed(bs) => {
                write!(f, "could not sample a point inside the cell of BS {} (zero-area cell?)", bs.0)
            }
            TopologyError::NoEligibleBs(dev) => {
                write!(f, "no eligible base station for device {}", dev.0)
            }
        }
    }
}

impl core::error::Error for TopologyError {}

impl Topology {
    /// Nearest BS satisfying `pred`, ties broken by lowest id.
    pub fn nearest_bs_where<F>(&self, pos: &Position, mut pred: F) -> Option<&BaseStation>
    where
        F: FnMut(&BaseStation) -> bool,
    {
        let mut best: Option<(&BaseStation, f64)> = None;
        for bs in &self.base_stations {
            if !pred(bs) {
                continue;
            }
            let d = bs.position.distance_m(pos);
            best = match best {
                None => Some((bs, d)),
                Some((b, bd)) => {
                    if d < bd || (d == bd && bs.id < b.id) {
                        Some((bs, d))
                    } else {
                        Some((b, bd))
                    }
                }
            };
        }
        best.map(|(b, _)| b)
    }

    /// Owner of the Voronoi cell containing `pos` (nearest over all BSs).
    pub fn cell_owner(&self, pos: &Position) -> Option<&BaseStation> {
        self.nearest_bs_where(pos, |_| true)
    }

    pub fn bs(&self, id: BsId) -> Option<&BaseStation> {
        self.base_stations.iter().find(|b| b.id == id)
    }

    /// Distinct operator ids, sorted.
    pub fn operator_ids(&self) -> Vec<OperatorId> {
        let mut ids: Vec<OperatorId> = self.base_stations.iter().map(|b| b.operator_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Axial hex lattice sites for the given ring count, in a canonical order
/// (center first, then each ring walked counter-clockwise from its east
/// corner). Site count is `1 + 3*rings*(rings+1)`.
fn hex_sites(rings: u32, isd_m: f64) -> Vec<Position> {
    let sqrt3_2 = libm::sqrt(3.0) / 2.0;
    let to_xy = |q: i64, r: i64| -> Position {
        Position::new(isd_m * (q as f64 + r as f64 / 2.0), isd_m * sqrt3_2 * r as f64)
    };
    let mut sites = Vec::with_capacity(1 + 3 * rings as usize * (rings as usize + 1));
    sites.push(to_xy(0, 0));
    // Axial walk directions, starting from the east corner of each ring.
    const DIRS: [(i64, i64); 6] = [(0, -1), (-1, 0), (-1, 1), (0, 1), (1, 0), (1, -1)];
    for k in 1..=rings as i64 {
        let (mut q, mut r) = (k, 0);
        for dir in DIRS {
            for _ in 0..k {
                sites.push(to_xy(q, r));
                q += dir.0;
                r += dir.1;
            }
        }
    }
    sites
}

/// Hexagonal multi-operator deployment. All generated sites are members of
/// the shared RAN; import a CSV to model exclusive-use sites.
pub fn gen_hex_grid(
    rings: u32,
    inter_site_distance_m: f64,
    operators: &[OperatorId],
    assignment: Assignment,
) -> Result<Topology, TopologyError> {
    if operators.is_empty() {
        return Err(TopologyError::NoOperators);
    }
    if !(inter_site_distance_m > 0.0) {
        return Err(TopologyError::InvalidParameter("inter_site_distance must be > 0"));
    }
    let sites = hex_sites(rings, inter_site_distance_m);
    let mut base_stations = Vec::new();
    match assignment {
        Assignment::Alternating => {
            for (i, p) in sites.iter().enumerate() {
                base_stations.push(BaseStation {
                    id: BsId(i as u32),
                    operator_id: operators[i % operators.len()],
                    position: *p,
                    shared: true,
                });
            }
        }
        Assignment::PerOperatorOverlay => {
            let mut next_id = 0u32;
            for (k, op) in operators.iter().enumerate() {
                let dx = k as f64 * inter_site_distance_m / 2.0;
                let dy = k as f64 * inter_site_distance_m / (2.0 * libm::sqrt(3.0));
                for p in &sites {
                    base_stations.push(BaseStation {
                        id: BsId(next_id),
                        operator_id: *op,
                        position: Position::new(p.x_m + dx, p.y_m + dy),
                        shared: true,
                    });
                    next_id += 1;
                }
            }
        }
    }
    let area = Rect::bounding(
        base_stations.iter().map(|b| b.position),
        inter_site_distance_m / 2.0,
    )
    .expect("at least one site");
    Ok(Topology { base_stations, area })
}

/// Base stations placed i.i.d. uniform over `area`, reproducible from `seed`.
pub fn gen_uniform(
    area: Rect,
    count_per_operator: u32,
    operators: &[OperatorId],
    seed: u64,
) -> Result<Topology, TopologyError> {
    if operators.is_empty() {
        return Err(TopologyError::NoOperators);
    }
    if count_per_operator == 0 {
        return Err(TopologyError::InvalidParameter("count_per_operator must be >= 1"));
    }
    if area.is_degenerate() {
        return Err(TopologyError::InvalidParameter("area is degenerate"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut base_stations = Vec::new();
    let mut next_id = 0u32;
    for op in operators {
        for _ in 0..count_per_operator {
            let x = rng.random_range(area.min_x_m..area.max_x_m);
            let y = rng.random_range(area.min_y_m..area.max_y_m);
            base_stations.push(BaseStation {
                id: BsId(next_id),
                operator_id: *op,
                position: Position::new(x, y),
                shared: true,
            });
            next_id += 1;
        }
    }
    Ok(Topology { base_stations, area })
}

const MAX_REJECTION_ATTEMPTS: u32 = 200_000;

/// Uniform placement of UEs and IoT candidates inside each Voronoi cell via
/// rejection sampling over the scenario area.
pub fn place_devices(
    topology: &Topology,
    ues_per_cell: u32,
    iot_per_cell: u32,
    profile: &DevicePowerProfile,
    operator_policy: DeviceOperatorPolicy,
    seed: u64,
) -> Result<Vec<Device>, TopologyError> {
    if topology.base_stations.is_empty() {
        return Err(TopologyError::EmptyTopology);
    }
    let operators = topology.operator_ids();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut devices = Vec::new();
    let mut next_id = 0u32;
    for bs in &topology.base_stations {
        let specs = [
            (DeviceKind::Ue, ues_per_cell, profile.ue_tx_power_dbm),
            (DeviceKind::Iot, iot_per_cell, profile.iot_tx_power_dbm),
        ];
        for (kind, count, tx_power_dbm) in specs {
            for _ in 0..count {
                let pos = sample_in_cell(topology, bs, &mut rng)?;
                let operator_id = match operator_policy {
                    DeviceOperatorPolicy::CellOwner => bs.operator_id,
                    DeviceOperatorPolicy::Uniform => operators[rng.random_range(0..operators.len())],
                };
                devices.push(Device {
                    id: DeviceId(next_id),
                    kind,
                    operator_id,
                    position: pos,
                    tx_power_dbm,
                    channel: None,
                    serving_bs: None,
                });
                next_id += 1;
            }
        }
    }
    Ok(devices)
}

fn sample_in_cell(
    topology: &Topology,
    bs: &BaseStation,
    rng: &mut ChaCha12Rng,
) -> Result<Position, TopologyError> {
    let area = &topology.area;
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let p = Position::new(
            rng.random_range(area.min_x_m..area.max_x_m),
            rng.random_range(area.min_y_m..area.max_y_m),
        );
        if topology.cell_owner(&p).map(|b| b.id) == Some(bs.id) {
            return Ok(p);
        }
    }
    Err(TopologyError::CellSamplingFailed(bs.id))
}

/// Serving base station for a device under the given association policy.
pub fn associate<'a>(
    device: &Device,
    topology: &'a Topology,
    mode: AssociationMode,
) -> Result<&'a BaseStation, TopologyError> {
    let found = match mode {
        AssociationMode::OwnOperator => {
            topology.nearest_bs_where(&device.position, |b| b.operator_id == device.operator_id)
        }
        AssociationMode::AnyShared => topology
            .nearest_bs_where(&device.position, |b| b.operator_id == device.operator_id || b.shared),
    };
    found.ok_or(TopologyError::NoEligibleBs(device.id))
}

/// Seeded shuffle used by callers that need a deterministic device order.
pub fn shuffled_indices(len: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_degenerate_lattice() {
        let t = gen_hex_grid(0, 1000.0, &[OperatorId(1)], Assignment::Alternating).unwrap();
        assert_eq!(t.base_stations.len(), 1);
        assert_eq!(t.base_stations[0].position, Position::new(0.0, 0.0));
    }

    #[test]
    fn hex_ring1_geometry() {
        let t = gen_hex_grid(1, 1000.0, &[OperatorId(1)], Assignment::Alternating).unwrap();
        assert_eq!(t.base_stations.len(), 7);
        // All ring sites are exactly one ISD from the center and from their
        // ring neighbors.
        let center = t.base_stations[0].position;
        for bs in &t.base_stations[1..] {
            assert!((bs.position.distance_m(&center) - 1000.0).abs() < 1e-9 * 1000.0);
        }
        for w in t.base_stations[1..].windows(2) {
            assert!((w[0].position.distance_m(&w[1].position) - 1000.0).abs() < 1e-9 * 1000.0);
        }
    }

    #[test]
    fn overlay_doubles_sites() {
        let ops = [OperatorId(1), OperatorId(2)];
        let t = gen_hex_grid(1, 1000.0, &ops, Assignment::PerOperatorOverlay).unwrap();
        assert_eq!(t.base_stations.len(), 14);
        for op in ops {
            assert_eq!(
                t.base_stations.iter().filter(|b| b.operator_id == op).count(),
                7
            );
        }
    }

    #[test]
    fn zero_operators_is_error() {
        assert_eq!(
            gen_hex_grid(1, 1000.0, &[], Assignment::Alternating),
            Err(TopologyError::NoOperators)
        );
    }

    #[test]
    fn uniform_is_reproducible() {
        let area = Rect::new(0.0, 0.0, 5000.0, 5000.0);
        let ops = [OperatorId(1), OperatorId(2)];
        let a = gen_uniform(area, 3, &ops, 99).unwrap();
        let b = gen_uniform(area, 3, &ops, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.base_stations.len(), 6);
        assert!(a.base_stations.iter().all(|bs| area.contains(&bs.position)));
    }

    #[test]
    fn association_tie_breaks_to_lowest_id() {
        let mk = |id, x| BaseStation {
            id: BsId(id),
            operator_id: OperatorId(1),
            position: Position::new(x, 0.0),
            shared: true,
        };
        let topo = Topology {
            base_stations: alloc::vec![mk(7, -100.0), mk(3, 100.0)],
            area: Rect::new(-200.0, -200.0, 200.0, 200.0),
        };
        let dev = Device {
            id: DeviceId(0),
            kind: DeviceKind::Iot,
            operator_id: OperatorId(1),
            position: Position::new(0.0, 0.0),
            tx_power_dbm: 20.0,
            channel: None,
            serving_bs: None,
        };
        let bs = associate(&dev, &topo, AssociationMode::OwnOperator).unwrap();
        assert_eq!(bs.id, BsId(3));
    }

    #[test]
    fn pooling_can_pick_closer_foreign_shared_bs() {
        let topo = Topology {
            base_stations: alloc::vec![
                BaseStation {
                    id: BsId(0),
                    operator_id: OperatorId(1),
                    position: Position::new(-1000.0, 0.0),
                    shared: true,
                },
                BaseStation {
                    id: BsId(1),
                    operator_id: OperatorId(2),
                    position: Position::new(100.0, 0.0),
                    shared: true,
                },
            ],
            area: Rect::new(-2000.0, -2000.0, 2000.0, 2000.0),
        };
        let dev = Device {
            id: DeviceId(0),
            kind: DeviceKind::Iot,
            operator_id: OperatorId(1),
            position: Position::new(0.0, 0.0),
            tx_power_dbm: 20.0,
            channel: None,
            serving_bs: None,
        };
        // Own-operator association sticks to the distant own site (1000 m),
        // any-shared picks the foreign shared site at 100 m.
        assert_eq!(associate(&dev, &topo, AssociationMode::OwnOperator).unwrap().id, BsId(0));
        assert_eq!(associate(&dev, &topo, AssociationMode::AnyShared).unwrap().id, BsId(1));
    }

    #[test]
    fn placement_lands_in_owning_cell() {
        let ops = [OperatorId(1), OperatorId(2)];
        let topo = gen_hex_grid(1, 1000.0, &ops, Assignment::Alternating).unwrap();
        let devices = place_devices(
            &topo,
            2,
            3,
            &DevicePowerProfile::default(),
            DeviceOperatorPolicy::CellOwner,
            7,
        )
        .unwrap();
        assert_eq!(devices.len(), 7 * 5);
        let mut idx = 0;
        for bs in &topo.base_stations {
            for _ in 0..5 {
                let d = &devices[idx];
                assert_eq!(topo.cell_owner(&d.position).unwrap().id, bs.id);
                assert!(topo.area.contains(&d.position));
                idx += 1;
            }
        }
    }

    #[test]
    fn placement_counts_and_powers() {
        let topo = gen_hex_grid(0, 1000.0, &[OperatorId(1)], Assignment::Alternating).unwrap();
        let devices = place_devices(
            &topo,
            20,
            50,
            &DevicePowerProfile::default(),
            DeviceOperatorPolicy::CellOwner,
            1,
        )
        .unwrap();
        assert_eq!(devices.len(), 70);
        assert!(devices
            .iter()
            .filter(|d| d.kind == DeviceKind::Ue)
            .all(|d| d.tx_power_dbm == 25.0));
        assert!(devices
            .iter()
            .filter(|d| d.kind == DeviceKind::Iot)
            .all(|d| d.tx_power_dbm == 20.0));
        let empty = place_devices(
            &topo,
            0,
            0,
            &DevicePowerProfile::default(),
            DeviceOperatorPolicy::CellOwner,
            1,
        )
        .unwrap();
        assert!(empty.is_empty());
    }
}
