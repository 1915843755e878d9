#![allow(dead_code)]

use rand::Rng;
use recurdim::graph::{build_address_graph, components, Component};
use recurdim::rational::{rat, to_f64};
use recurdim::spec::{MapDef, Node, Orientation};
use recurdim::{parse_spec, Polynomial, RfifSpec};

pub mod oracle;

pub const TWO_COMPONENTS: &str = include_str!("../data/two_components.cfg");
pub const CLASSICAL: &str = include_str!("../data/classical.cfg");

pub fn two_components() -> RfifSpec {
    parse_spec(TWO_COMPONENTS).expect("example spec parses")
}

pub fn classical() -> RfifSpec {
    parse_spec(CLASSICAL).expect("classical spec parses")
}

pub fn comps(spec: &RfifSpec) -> Vec<Component> {
    components(&build_address_graph(spec), spec).expect("uniform ratios")
}

/// Affine polynomial through `(a, va)` and `(b, vb)`.
pub fn affine_through(a: f64, va: f64, b: f64, vb: f64) -> Polynomial {
    let slope = (vb - va) / (b - a);
    Polynomial::new(vec![va - slope * a, slope]).expect("degree 1")
}

/// Rebuilds `spec` with the given scaling per map, choosing affine `q_n`
/// so that the interpolation constraints hold.
pub fn with_scalings(spec: &RfifSpec, scalings: Vec<Polynomial>) -> RfifSpec {
    let defs = spec
        .maps
        .iter()
        .zip(scalings)
        .map(|(m, s)| map_def(spec.nodes.as_slice(), m.n, m.ell, m.r, m.orientation, s))
        .collect();
    RfifSpec::new(spec.nodes.clone(), defs).expect("rebuilt spec is well formed")
}

fn map_def(
    nodes: &[Node],
    n: usize,
    ell: usize,
    r: usize,
    orientation: Orientation,
    s: Polynomial,
) -> MapDef {
    let (a, b) = match orientation {
        Orientation::Plus => (n - 1, n),
        Orientation::Minus => (n, n - 1),
    };
    let (xl, xr) = (to_f64(&nodes[ell].x), to_f64(&nodes[r].x));
    let ql = nodes[a].y - s.eval(xl) * nodes[ell].y;
    let qr = nodes[b].y - s.eval(xr) * nodes[r].y;
    MapDef {
        n,
        ell,
        r,
        orientation,
        s,
        q: affine_through(xl, ql, xr, qr),
    }
}

/// Random valid spec on the uniform grid `i/N` with every domain spanning `T`
/// intervals and affine scalings bounded by `0.9` in modulus. Retries until
/// the address graph has at least one component.
pub fn random_spec<R: Rng>(rng: &mut R) -> RfifSpec {
    loop {
        let t: usize = rng.gen_range(2..=3);
        let n_maps: usize = rng.gen_range(t.max(2)..=8);
        let nodes: Vec<Node> = (0..=n_maps)
            .map(|i| Node {
                x: rat(i as i128, n_maps as i128),
                y: rng.gen_range(-1.0..1.0),
            })
            .collect();
        let defs: Vec<MapDef> = (1..=n_maps)
            .map(|n| {
                let ell = rng.gen_range(0..=n_maps - t);
                let r = ell + t;
                let orientation = if rng.gen_bool(0.5) {
                    Orientation::Plus
                } else {
                    Orientation::Minus
                };
                let (xl, xr) = (to_f64(&nodes[ell].x), to_f64(&nodes[r].x));
                let s = affine_through(xl, rng.gen_range(-0.9..0.9), xr, rng.gen_range(-0.9..0.9));
                map_def(&nodes, n, ell, r, orientation, s)
            })
            .collect();
        let spec = RfifSpec::new(nodes, defs).expect("generated spec is well formed");
        if !comps(&spec).is_empty() {
            return spec;
        }
    }
}
