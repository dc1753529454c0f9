/// How a row-major operand is read by [`matmul`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Use the stored `rows x cols` matrix as is.
    Normal,
    /// Use the transpose of the stored matrix.
    Transposed,
}

/// `c = alpha * op(a) * op(b) + beta * c` for row-major buffers.
///
/// `op(a)` is `m x k`, `op(b)` is `k x n` and `c` is `m x n`. Stored shapes are
/// implied by the layout: a transposed `a` is stored as `k x m`.
#[allow(clippy::too_many_arguments)]
pub fn matmul(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    a_layout: Layout,
    b: &[f64],
    b_layout: Layout,
    beta: f64,
    c: &mut [f64],
) {
    assert_eq!(a.len(), m * k, "lhs buffer does not hold {m}x{k}");
    assert_eq!(b.len(), k * n, "rhs buffer does not hold {k}x{n}");
    assert_eq!(c.len(), m * n, "output buffer does not hold {m}x{n}");
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = match a_layout {
        Layout::Normal => (k as isize, 1),
        Layout::Transposed => (1, m as isize),
    };
    let (rsb, csb) = match b_layout {
        Layout::Normal => (n as isize, 1),
        Layout::Transposed => (1, k as isize),
    };
    // SAFETY: the asserts above pin every buffer to exactly the extent the
    // strides address, and `c` is uniquely borrowed.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
