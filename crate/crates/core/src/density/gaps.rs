//! Gap statistics for subsets of a `d`-dimensional index grid.

/// Side of the largest axis-parallel hypercube of grid cells containing no
/// member. `mask` is row-major with the last axis fastest.
pub fn largest_empty_cube(mask: &[bool], shape: &[usize]) -> usize {
    let d = shape.len();
    let total: usize = shape.iter().product();
    assert_eq!(mask.len(), total, "mask does not match the grid shape");
    let strides: Vec<usize> = (0..d).map(|i| shape[i + 1..].iter().product()).collect();
    // side[p]: largest empty cube whose maximal corner is p
    let mut side = vec![0usize; total];
    let mut best = 0;
    let mut idx = vec![0usize; d];
    for p in 0..total {
        if !mask[p] {
            let mut m = usize::MAX;
            for subset in 1..1usize << d {
                let mut q = p;
                let mut inside = true;
                for i in 0..d {
                    if subset >> i & 1 == 1 {
                        if idx[i] == 0 {
                            inside = false;
                            break;
                        }
                        q -= strides[i];
                    }
                }
                m = m.min(if inside { side[q] } else { 0 });
                if m == 0 {
                    break;
                }
            }
            side[p] = 1 + if d == 0 { 0 } else { m };
            best = best.max(side[p]);
        }
        for i in (0..d).rev() {
            idx[i] += 1;
            if idx[i] < shape[i] {
                break;
            }
            idx[i] = 0;
        }
    }
    best
}

/// `(length, occurrences)` of maximal runs of non-members along the last axis,
/// sorted by length.
pub fn gap_histogram(mask: &[bool], shape: &[usize]) -> Vec<(usize, usize)> {
    let Some(&last) = shape.last() else {
        return Vec::new();
    };
    let mut hist = std::collections::BTreeMap::new();
    for row in mask.chunks(last) {
        let mut run = 0;
        for &m in row.iter().chain(std::iter::once(&true)) {
            if m {
                if run > 0 {
                    *hist.entry(run).or_insert(0) += 1;
                }
                run = 0;
            } else {
                run += 1;
            }
        }
    }
    hist.into_iter().collect()
}
