//! Exact planar geometry: hulls, clipping, Minkowski sums and a lower
//! hull (the Legendre transform of a finite function).

use nama::polyhedra::{clip, hull, lower_hull, minkowski_sum, HalfSpace};
use nama::scalar::{format_scalar, int, ipoint, ratio};

fn main() {
    let square = hull(&[ipoint(&[0, 0]), ipoint(&[1, 0]), ipoint(&[0, 1]), ipoint(&[1, 1]), ipoint(&[1, 1])], 2).unwrap();
    println!("square: {} vertices, area {}", square.vertices().len(), format_scalar(&square.volume()));

    // Cut along x + y <= 1/2 and check the two halves add up.
    let h = HalfSpace::new(ipoint(&[1, 1]), ratio(1, 2));
    let below = clip(&square, std::slice::from_ref(&h)).unwrap();
    let above = clip(&square, &[h.complement()]).unwrap();
    println!(
        "clipped areas {} + {} = {}",
        format_scalar(&below.volume()),
        format_scalar(&above.volume()),
        format_scalar(&(below.volume() + above.volume()))
    );

    let triangle = hull(&[ipoint(&[0, 0]), ipoint(&[1, 0]), ipoint(&[0, 1])], 2).unwrap();
    let sum = minkowski_sum(&square, &triangle).unwrap();
    println!("square + triangle: {} vertices, area {}", sum.vertices().len(), format_scalar(&sum.volume()));

    // Heights over the vertices of the square; the lower hull gives the
    // convex piecewise-affine function they span from below.
    let lifted = vec![
        (ipoint(&[0, 0]), int(0)),
        (ipoint(&[1, 0]), int(1)),
        (ipoint(&[0, 1]), int(1)),
        (ipoint(&[1, 1]), int(1)),
    ];
    let lh = lower_hull(&lifted).unwrap();
    println!("lower hull has {} cells; value at (1/2, 1/2) = {}", lh.cells.len(), format_scalar(&lh.evaluate(&[ratio(1, 2), ratio(1, 2)])));
}
