//! Enumerates the image sources of a small room up to order 3 and prints
//! the per-order counts plus the earliest arrivals with their delay,
//! distance attenuation and arrival direction.
//!
//! Run with: cargo run --example image_sources

use lateverb::geometry::{ShoeboxRoom, Vec3};
use lateverb::ism::compute_image_sources;

fn main() -> Result<(), lateverb::error::Error> {
    let room = ShoeboxRoom::uniform(Vec3::new(6.0, 5.0, 4.0), 0.25)?;
    let source = Vec3::new(1.2, 1.7, 1.1);
    let receiver = Vec3::new(4.0, 2.8, 2.0);
    let images = compute_image_sources(&room, source, receiver, 3)?;

    for order in 0..=3 {
        let n = images.iter().filter(|i| i.order == order).count();
        println!("order {order}: {n} images");
    }
    println!();
    println!("earliest ten arrivals:");
    println!(
        "{:>5}  {:>8}  {:>8}  {:>6}  arrival direction",
        "order", "delay ms", "dist m", "1/d"
    );
    for img in images.iter().take(10) {
        println!(
            "{:>5}  {:>8.2}  {:>8.2}  {:>6.3}  ({:+.2} {:+.2} {:+.2})",
            img.order,
            img.delay * 1e3,
            img.distance,
            1.0 / img.distance,
            img.arrival_dir.x,
            img.arrival_dir.y,
            img.arrival_dir.z
        );
    }
    Ok(())
}
