//! Two ways of turning ẋ = t into an autonomous system on (t, x).

use singular_flow::autonomize::{autonomize_first_order, JetField, Mode};
use singular_flow::system::{load_system_str, to_document, LoadedSystem};

const SPEC: &str = r#"{"kind": "linearly_singular", "states": ["x"], "A": [["1"]], "c": ["-t"]}"#;

fn main() {
    let LoadedSystem::LinearlySingular(sys) = load_system_str(SPEC).unwrap() else { unreachable!() };
    let gamma = JetField::parse(&sys.chart, &["t".to_string()]).unwrap();
    for (name, mode) in [("vector hull", Mode::VectorHull), ("jet field Γ = t", Mode::JetField(Some(gamma)))] {
        let auto = autonomize_first_order(&sys, &mode).unwrap();
        let doc = to_document(&LoadedSystem::LinearlySingular(auto));
        println!("{name}:\n{}", doc.to_json());
    }
}
