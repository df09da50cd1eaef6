mod common;

use common::{check_oracles, corpus};
use nvem::material::Material;

#[test]
fn nvem_and_vem_stiffness_match_oracles_on_corpus() {
    let materials = [
        Material::plane_strain(1e7, 0.3).unwrap(),
        Material::plane_strain(250.0, 0.4999).unwrap(),
        Material::plane_stress(2e5, 0.3).unwrap(),
    ];
    let mut checked = 0;
    for (name, mesh) in corpus().into_iter().filter(|(_, m)| m.num_dofs() <= 100) {
        for m in &materials {
            if let Err(e) = check_oracles(&mesh, m) {
                panic!("{name}: {e}");
            }
        }
        checked += 1;
    }
    assert!(checked >= 15, "only {checked} corpus meshes");
}
