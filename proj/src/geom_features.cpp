#include "geospark/geom_features.hpp"

#include <algorithm>
#include <cmath>

namespace geospark {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 normalized(const Vec3& v) {
    double n = std::sqrt(squared_norm(v));
    if (n == 0.0) return {0, 0, 0};
    return {v[0] / n, v[1] / n, v[2] / n};
}

// Cyclic Jacobi sweeps; used when the analytic route is ill-conditioned.
SymEigen3 jacobi_eigen3(Mat3 a) {
    Mat3 v = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if (off < 1e-30) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a[p][q] == 0.0) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    SymEigen3 out;
    std::array<int, 3> order = {0, 1, 2};
    std::array<double, 3> ev = {a[0][0], a[1][1], a[2][2]};
    std::sort(order.begin(), order.end(), [&](int x, int y) { return ev[x] > ev[y]; });
    for (int i = 0; i < 3; ++i) {
        out.values[i] = ev[order[i]];
        out.vectors[i] = normalized({v[0][order[i]], v[1][order[i]], v[2][order[i]]});
    }
    return out;
}

}  // namespace

SymEigen3 sym_eigen3(const Mat3& m) {
    // Analytic eigenvalues (trigonometric form for symmetric 3x3).
    double p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    double tr = m[0][0] + m[1][1] + m[2][2];
    if (p1 == 0.0) {
        // already diagonal
        SymEigen3 out;
        std::array<int, 3> order = {0, 1, 2};
        std::array<double, 3> ev = {m[0][0], m[1][1], m[2][2]};
        std::sort(order.begin(), order.end(), [&](int x, int y) { return ev[x] > ev[y]; });
        for (int i = 0; i < 3; ++i) {
            out.values[i] = ev[order[i]];
            Vec3 e{0, 0, 0};
            e[order[i]] = 1.0;
            out.vectors[i] = e;
        }
        return out;
    }
    double q = tr / 3.0;
    double p2 = (m[0][0] - q) * (m[0][0] - q) + (m[1][1] - q) * (m[1][1] - q) +
                (m[2][2] - q) * (m[2][2] - q) + 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    Mat3 b;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b[i][j] = (m[i][j] - (i == j ? q : 0.0)) / p;
    double detb = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                  b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                  b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    double r = std::clamp(detb / 2.0, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    std::array<double, 3> ev;
    ev[0] = q + 2.0 * p * std::cos(phi);
    ev[2] = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    ev[1] = tr - ev[0] - ev[2];

    // near-degenerate spectrum: hand off to the iterative solver
    double scale = std::max({std::abs(ev[0]), std::abs(ev[1]), std::abs(ev[2]), 1e-300});
    if ((ev[0] - ev[1]) / scale < 1e-8 || (ev[1] - ev[2]) / scale < 1e-8)
        return jacobi_eigen3(m);

    SymEigen3 out;
    for (int i = 0; i < 3; ++i) out.values[i] = ev[i];
    for (int i = 0; i < 3; ++i) {
        // eigenvector from cross product of two rows of (M - lambda I)
        Mat3 a = m;
        for (int d = 0; d < 3; ++d) a[d][d] -= ev[i];
        Vec3 r0 = {a[0][0], a[0][1], a[0][2]};
        Vec3 r1 = {a[1][0], a[1][1], a[1][2]};
        Vec3 r2 = {a[2][0], a[2][1], a[2][2]};
        Vec3 c01 = cross(r0, r1), c02 = cross(r0, r2), c12 = cross(r1, r2);
        Vec3 best = c01;
        if (squared_norm(c02) > squared_norm(best)) best = c02;
        if (squared_norm(c12) > squared_norm(best)) best = c12;
        if (squared_norm(best) < 1e-24) return jacobi_eigen3(m);
        out.vectors[i] = normalized(best);
    }
    return out;
}

GeomFeatureSet compute_geometric_features(const PointCloud& cloud, std::size_t k_geo) {
    if (k_geo < 3) throw ArgumentError("compute_geometric_features requires k_geo >= 3");
    std::size_t n = cloud.size();
    if (n < k_geo) throw ArgumentError("compute_geometric_features requires n >= k_geo");

    KnnIndex index(cloud.coords);
    GeomFeatureSet out;
    out.k_geo = k_geo;
    out.features = Matrix(n, kGeomFeatureCount);

    std::vector<int> idx;
    std::vector<double> dist;
    for (std::size_t i = 0; i < n; ++i) {
        index.query(cloud.coords[i], k_geo, idx, dist);
        Vec3 mean{0, 0, 0};
        for (int j : idx) mean = mean + cloud.coords[j];
        double inv = 1.0 / static_cast<double>(idx.size());
        mean = {mean[0] * inv, mean[1] * inv, mean[2] * inv};

        std::array<std::array<double, 3>, 3> cov{};
        for (int j : idx) {
            Vec3 d = cloud.coords[j] - mean;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) cov[a][b] += d[a] * d[b] * inv;
        }

        SymEigen3 eig = sym_eigen3(cov);
        // covariance is PSD; clamp roundoff-negative eigenvalues
        for (double& v : eig.values) v = std::max(v, 0.0);
        double l1 = eig.values[0], l2 = eig.values[1], l3 = eig.values[2];
        double linearity = 0.0, planarity = 0.0, scattering = 0.0, verticality = 0.0;
        if (l1 > 0.0) {
            linearity = (l1 - l2) / l1;
            planarity = (l2 - l3) / l1;
            scattering = l3 / l1;
            // eigenvalue-weighted absolute eigenvector direction, z component
            Vec3 v{0, 0, 0};
            for (int k = 0; k < 3; ++k)
                for (int c = 0; c < 3; ++c) v[c] += eig.values[k] * std::abs(eig.vectors[k][c]);
            double vn = std::sqrt(squared_norm(v));
            if (vn > 0.0) verticality = std::abs(v[2]) / vn;
        }
        out.features(i, 0) = std::clamp(linearity, 0.0, 1.0);
        out.features(i, 1) = std::clamp(planarity, 0.0, 1.0);
        out.features(i, 2) = std::clamp(scattering, 0.0, 1.0);
        out.features(i, 3) = std::clamp(verticality, 0.0, 1.0);
    }
    return out;
}

}  // namespace geospark
