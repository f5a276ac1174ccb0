#include "vlab/fem.hpp"

#include <set>

namespace vlab {

double ScalarField::eval_in_tri(int t, const Vec2& p) const {
    auto l = mesh->barycentric(t, p);
    const auto& tv = mesh->tris[t];
    return l[0] * values[tv[0]] + l[1] * values[tv[1]] + l[2] * values[tv[2]];
}

double ScalarField::eval(const Vec2& p) const {
    int t = mesh->locate(p);
    if (t < 0) throw OutOfDomain("field evaluation outside the mesh");
    return eval_in_tri(t, p);
}

Vec2 ScalarField::grad_tri(int t) const {
    const auto& tv = mesh->tris[t];
    const auto& g = mesh->hat_grad[t];
    return values[tv[0]] * g[0] + values[tv[1]] * g[1] + values[tv[2]] * g[2];
}

Vec2 ScalarField::grad_at(const Vec2& p) const {
    int t = mesh->locate(p);
    if (t < 0) throw OutOfDomain("gradient evaluation outside the mesh");
    auto l = mesh->barycentric(t, p);
    const double eps = 1e-11;
    // vertex hit: average triangles around that vertex
    for (int k = 0; k < 3; ++k) {
        if (l[k] > 1.0 - eps) {
            int v = mesh->tris[t][k];
            Vec2 acc{0, 0};
            double area = 0.0;
            for (int tt : mesh->vert_tris[v]) {
                acc += mesh->tri_area[tt] * grad_tri(tt);
                area += mesh->tri_area[tt];
            }
            return acc / area;
        }
    }
    // edge hit: average the (up to) two triangles sharing the edge
    for (int k = 0; k < 3; ++k) {
        if (std::abs(l[k]) < eps) {
            int a = mesh->tris[t][(k + 1) % 3], b = mesh->tris[t][(k + 2) % 3];
            Vec2 acc{0, 0};
            double area = 0.0;
            for (int tt : mesh->vert_tris[a]) {
                const auto& tv = mesh->tris[tt];
                if (tv[0] == b || tv[1] == b || tv[2] == b) {
                    acc += mesh->tri_area[tt] * grad_tri(tt);
                    area += mesh->tri_area[tt];
                }
            }
            return acc / area;
        }
    }
    return grad_tri(t);
}

Vec2 harmonic_mean_gradient(const ScalarField& u, const Vec2& c, double rho, int n) {
    // (1/|B|) \int_B grad u = (1/(pi rho^2)) \oint u nu ds, trapezoid
    Vec2 acc{0, 0};
    for (int k = 0; k < n; ++k) {
        double a = TWO_PI * k / n;
        Vec2 nu{std::cos(a), std::sin(a)};
        acc += u.eval(c + rho * nu) * nu;
    }
    return acc * (TWO_PI * rho / n) / (PI * rho * rho);
}

double harmonic_mean_value(const ScalarField& u, const Vec2& c, double rho, int n) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        double a = TWO_PI * k / n;
        acc += u.eval(c + rho * Vec2{std::cos(a), std::sin(a)});
    }
    return acc / n;
}

// --------------------------------------------------------------- LaplaceOp

LaplaceOp::LaplaceOp(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
    const Mesh& m = *mesh_;
    int nv = m.num_verts();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve((size_t)m.num_tris() * 9);
    for (int t = 0; t < m.num_tris(); ++t) {
        const auto& tv = m.tris[t];
        const auto& g = m.hat_grad[t];
        double A = m.tri_area[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.emplace_back(tv[i], tv[j], A * g[i].dot(g[j]));
    }
    K_.resize(nv, nv);
    K_.setFromTriplets(trips.begin(), trips.end());

    bmass_ = Eigen::VectorXd::Zero(nv);
    for (const auto& e : m.bedges) {
        double half = 0.5 * dist(m.verts[e.a], m.verts[e.b]);
        bmass_[e.a] += half;
        bmass_[e.b] += half;
    }

    pos_.assign(nv, -1);
    for (int v = 0; v < nv; ++v)
        if (!m.on_boundary[v]) {
            pos_[v] = (int)interior_.size();
            interior_.push_back(v);
        }

    // interior block factorization (shared by every Dirichlet solve)
    int ni = (int)interior_.size();
    std::vector<Eigen::Triplet<double>> it;
    for (int k = 0; k < K_.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator iter(K_, k); iter; ++iter) {
            int pi = pos_[iter.row()], pj = pos_[iter.col()];
            if (pi >= 0 && pj >= 0) it.emplace_back(pi, pj, iter.value());
        }
    Eigen::SparseMatrix<double> KII(ni, ni);
    KII.setFromTriplets(it.begin(), it.end());
    interior_ldlt_.compute(KII);
    if (interior_ldlt_.info() != Eigen::Success)
        throw SolveFailure("stiffness factorization failed");
}

ScalarField LaplaceOp::solve_dirichlet(const Eigen::VectorXd& boundary_values,
                                       const Eigen::VectorXd* load) const {
    const Mesh& m = *mesh_;
    int nv = m.num_verts(), ni = (int)interior_.size();

    Eigen::VectorXd g = Eigen::VectorXd::Zero(nv);
    for (int v = 0; v < nv; ++v)
        if (m.on_boundary[v]) g[v] = boundary_values[v];

    Eigen::VectorXd coupled = K_ * g;
    Eigen::VectorXd rhs(ni);
    for (int i = 0; i < ni; ++i) {
        rhs[i] = -coupled[interior_[i]];
        if (load) rhs[i] += (*load)[interior_[i]];
    }
    Eigen::VectorXd xi = interior_ldlt_.solve(rhs);
    if (interior_ldlt_.info() != Eigen::Success)
        throw SolveFailure("Dirichlet solve failed");

    ScalarField u;
    u.mesh = mesh_;
    u.values = g;
    for (int i = 0; i < ni; ++i) u.values[interior_[i]] = xi[i];

    // relative residual of the interior equations
    Eigen::VectorXd full = K_ * u.values;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < ni; ++i) {
        double b = load ? (*load)[interior_[i]] : 0.0;
        num += (full[interior_[i]] - b) * (full[interior_[i]] - b);
        den += b * b;
    }
    last_residual_ = std::sqrt(num) / (1.0 + std::sqrt(den));
    return u;
}

ScalarField LaplaceOp::solve_neumann(const Eigen::VectorXd& rhs) const {
    const Mesh& m = *mesh_;
    int nv = m.num_verts();
    if (!neumann_lu_) {
        std::vector<Eigen::Triplet<double>> trips;
        for (int k = 0; k < K_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator iter(K_, k); iter; ++iter)
                trips.emplace_back((int)iter.row(), (int)iter.col(), iter.value());
        for (int v = 0; v < nv; ++v)
            if (bmass_[v] != 0.0) {
                trips.emplace_back(v, nv, bmass_[v]);
                trips.emplace_back(nv, v, bmass_[v]);
            }
        neumann_kkt_.resize(nv + 1, nv + 1);
        neumann_kkt_.setFromTriplets(trips.begin(), trips.end());
        neumann_lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        neumann_lu_->compute(neumann_kkt_);
        if (neumann_lu_->info() != Eigen::Success)
            throw SolveFailure("Neumann KKT factorization failed");
    }
    Eigen::VectorXd b(nv + 1);
    b.head(nv) = rhs;
    b[nv] = 0.0;
    Eigen::VectorXd x = neumann_lu_->solve(b);
    if (neumann_lu_->info() != Eigen::Success) throw SolveFailure("Neumann solve failed");

    last_residual_ = (neumann_kkt_ * x - b).norm() / (1.0 + b.norm());

    ScalarField u;
    u.mesh = mesh_;
    u.values = x.head(nv);
    return u;
}

double LaplaceOp::loop_flux(const ScalarField& u, int loop) const {
    const Mesh& m = *mesh_;
    Eigen::VectorXd Ku = K_ * u.values;
    double f = 0.0;
    for (int v : m.loops.at(loop)) f += Ku[v];
    return f;
}

double poisson_disk_value(const std::function<double(double)>& g, const Vec2& p, int n) {
    double r2 = p.norm2();
    if (r2 >= 1.0) throw OutOfDomain("Poisson kernel needs |p| < 1");
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        double th = TWO_PI * k / n;
        Vec2 q{std::cos(th), std::sin(th)};
        acc += g(th) * (1.0 - r2) / (p - q).norm2();
    }
    return acc / n;
}

} // namespace vlab
