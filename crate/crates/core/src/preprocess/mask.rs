use super::{BinaryMask, HuImage};

/// Largest 4-connected component of `{value > threshold_hu}`.
///
/// Ties between equally sized components go to the one reached first in
/// raster order. An image with nothing above the threshold yields an empty
/// mask.
pub fn brain_mask(img: &HuImage, threshold_hu: f64) -> BinaryMask {
    let (w, h) = (img.width, img.height);
    let above: Vec<bool> = img.values.iter().map(|v| *v > threshold_hu).collect();
    let mut label = vec![0u32; w * h];
    let mut best = (0u32, 0usize);
    let mut next = 0u32;
    let mut stack = Vec::new();

    for start in 0..w * h {
        if !above[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        stack.push(start);
        let mut size = 0usize;
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if above[j] && label[j] == 0 {
                    label[j] = next;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if size > best.1 {
            best = (next, size);
        }
    }

    let keep = best.0;
    BinaryMask {
        width: w,
        height: h,
        bits: label.iter().map(|&l| keep != 0 && l == keep).collect(),
    }
}
