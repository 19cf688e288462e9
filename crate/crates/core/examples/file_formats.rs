//! Writing and reading matrices, instances, and group structures.

use coopnet::approx_group::{Color, GroupStructure};
use coopnet::generators::{gen_instance, gen_wbar, load_edge_list, GraphSpec, IndexBase, InstanceSpec};
use coopnet::{InfluenceMatrix, Instance};

fn main() -> coopnet::Result<()> {
    let dir = std::env::temp_dir().join("coopnet-formats");
    std::fs::create_dir_all(&dir)?;

    let wbar = gen_wbar(&GraphSpec::ws(8, 1))?;
    println!("dense:\n{}", wbar.to_dense_csv());
    println!("triplets:\n{}", wbar.to_triplet_csv());
    assert_eq!(InfluenceMatrix::from_csv_str(&wbar.to_triplet_csv())?, wbar);

    let inst = gen_instance(&wbar, &InstanceSpec::with_seed(1))?;
    wbar.save(dir.join("w.csv"))?;
    std::fs::write(dir.join("inst.json"), inst.to_json_with_path("w.csv")?)?;
    let back = Instance::load(dir.join("inst.json"))?;
    println!("instance round trip: {}", back == inst);

    let group = GroupStructure::new(vec![Color::Red, Color::Blue, Color::White], 0.5, vec![0.1, 0.2, 0.3], 0.25)?;
    println!("{}", group.to_json()?);

    let edges = load_edge_list("1 2\n2 3\n3 1 0.5\n", IndexBase::Auto, true)?;
    println!("edge list -> {}x{} adjacency", edges.n(), edges.n());
    Ok(())
}
