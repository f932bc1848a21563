#pragma once

#include <cstddef>
#include <vector>

namespace newsbench {

// Dense row-major matrix of doubles. Small enough on purpose: toy-scale
// models never need views, strides, or BLAS.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    double* row(std::size_t r) { return a.data() + r * cols; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }
    std::size_t size() const { return a.size(); }
};

// C = A·B, (m×k)·(k×n)
inline Mat matmul(const Mat& A, const Mat& B) {
    Mat C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        for (std::size_t k = 0; k < A.cols; ++k) {
            const double aik = A.at(i, k);
            if (aik == 0.0) continue;
            const double* brow = B.row(k);
            double* crow = C.row(i);
            for (std::size_t j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return C;
}

// C = A·Bᵀ, (m×k)·(n×k)ᵀ
inline Mat matmul_nt(const Mat& A, const Mat& B) {
    Mat C(A.rows, B.rows);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* arow = A.row(i);
        for (std::size_t j = 0; j < B.rows; ++j) {
            const double* brow = B.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < A.cols; ++k) s += arow[k] * brow[k];
            C.at(i, j) = s;
        }
    }
    return C;
}

// C = Aᵀ·B, (k×m)ᵀ·(k×n)
inline Mat matmul_tn(const Mat& A, const Mat& B) {
    Mat C(A.cols, B.cols);
    for (std::size_t k = 0; k < A.rows; ++k) {
        const double* arow = A.row(k);
        const double* brow = B.row(k);
        for (std::size_t i = 0; i < A.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* crow = C.row(i);
            for (std::size_t j = 0; j < B.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    return C;
}

inline void add_inplace(Mat& x, const Mat& y) {
    for (std::size_t i = 0; i < x.a.size(); ++i) x.a[i] += y.a[i];
}

inline void scale_inplace(Mat& x, double s) {
    for (double& v : x.a) v *= s;
}

}  // namespace newsbench
