//! Writes the toy actuator catalog, the synthetic task files and the
//! reference configuration into a data directory.
//!
//! `cargo run -p ankle-core --example generate_data -- data`

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use ankle_core::io::{save_catalog, synthetic_tasks, toy_catalog, write_task_csv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(root.join("tasks"))?;
    save_catalog(&toy_catalog(), &root.join("catalog.json"))?;
    for task in synthetic_tasks() {
        let path = root.join("tasks").join(format!("{}.csv", task.id));
        let mut out = BufWriter::new(File::create(&path)?);
        let note = "SYNTHETIC task trajectory generated by examples/generate_data.rs.\n\
                    Not measured robot data. Angles deg, rates deg/s, torques Nm.";
        write_task_csv(&task, note, &mut out)?;
        println!("wrote {} ({} samples)", path.display(), task.samples.len());
    }
    Ok(())
}
