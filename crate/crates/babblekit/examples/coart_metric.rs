//! Range-normalized articulatory distances between canonical phone targets.
//!
//! Run with: `cargo run --example coart_metric`

use babblekit::artic::ArticulatorySpace;
use babblekit::phones::PhoneSet;

fn main() -> babblekit::Result<()> {
    let space = ArticulatorySpace::builtin();
    let phones = PhoneSet::builtin();

    println!("free dimensions: {:?}", space.free_names());
    println!();
    println!("pairwise coarticulation distances (mean |normalized diff|):");
    let symbols = ["p", "t", "k", "l", "w", "aa", "iy", "uw"];
    print!("{:>6}", "");
    for s in symbols {
        print!("{s:>7}");
    }
    println!();
    for a in symbols {
        print!("{a:>6}");
        let ta = phones.target(&space, a)?;
        for b in symbols {
            let tb = phones.target(&space, b)?;
            print!("{:>7.3}", space.coart_distance(&ta, &tb)?);
        }
        println!();
    }

    println!();
    let p = phones.target(&space, "p")?;
    let aa = phones.target(&space, "aa")?;
    println!("per-dimension |p - aa| over the free dimensions:");
    for (name, d) in space.free_names().iter().zip(space.per_dimension_distance(&p, &aa)?) {
        println!("  {name:>4}  {d:.3}");
    }
    Ok(())
}
