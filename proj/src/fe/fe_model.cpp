#include "dnf/fe/fe_model.hpp"

#include "dnf/core/error.hpp"
#include "dnf/core/parallel.hpp"
#include "dnf/fe/element.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <set>
#include <string>

namespace dnf::fe {

using Mat3 = Eigen::Matrix3d;

struct FeModel::Data {
  Mesh mesh;
  Material material;
  double lambda = 0.0;
  double mu = 0.0;
  int npe = 0;
  int nq = 0;
  std::vector<Index> free_map;  // total dof -> free index or -1
  std::vector<Index> constrained;
  Index nfree = 0;
  std::vector<double> grads;  // [element][qp][node][3] physical gradients
  std::vector<double> wdet;   // [element][qp]

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> gradient(int e, int q) const {
    const std::size_t off = (static_cast<std::size_t>(e) * nq + q) * npe * 3;
    return {grads.data() + off, npe, 3};
  }

  Mat3 stress(const Mat3& strain) const {
    return lambda * strain.trace() * Mat3::Identity() + 2.0 * mu * strain;
  }
};

namespace {

constexpr int kChunk = 256;

Mat3 sym(const Mat3& a) { return 0.5 * (a + a.transpose()); }
Mat3 ens(const Mat3& a, const Mat3& b) { return 0.5 * (a.transpose() * b + b.transpose() * a); }

Eigen::MatrixXd element_coords(const Mesh& mesh, int e) {
  const int npe = nodes_per_element(mesh.kind);
  Eigen::MatrixXd x(npe, 3);
  const int* conn = mesh.element(e);
  for (int a = 0; a < npe; ++a)
    for (int j = 0; j < 3; ++j) x(a, j) = mesh.nodes[static_cast<std::size_t>(conn[a])][static_cast<std::size_t>(j)];
  return x;
}

/// Evaluates sum over elements of w * D * T^T, with T produced by `kernel` from the argument gradients.
template <int NArgs, class Kernel>
Vec assemble_force(const FeModel& model, const FeModel::Data& d, const std::array<const Vec*, NArgs>& args,
                   Kernel kernel) {
  std::array<Vec, NArgs> total;
  for (int k = 0; k < NArgs; ++k) {
    if (args[k]->size() != d.nfree)
      throw DimensionError("force argument length " + std::to_string(args[k]->size()) + " differs from free DOF count " +
                           std::to_string(d.nfree));
    total[k] = model.expand(*args[k]);
  }
  const int ne = d.mesh.element_count();
  const int npe = d.npe;
  std::vector<double> buffer(static_cast<std::size_t>(ne) * npe * 3, 0.0);
  const std::size_t chunks = (static_cast<std::size_t>(ne) + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const int e0 = static_cast<int>(c) * kChunk;
    const int e1 = std::min(ne, e0 + kChunk);
    Eigen::MatrixXd ue[NArgs];
    for (int e = e0; e < e1; ++e) {
      const int* conn = d.mesh.element(e);
      for (int k = 0; k < NArgs; ++k) {
        ue[k].resize(npe, 3);
        for (int a = 0; a < npe; ++a)
          for (int i = 0; i < 3; ++i) ue[k](a, i) = total[k](3 * conn[a] + i);
      }
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> fe(
          buffer.data() + static_cast<std::size_t>(e) * npe * 3, npe, 3);
      for (int q = 0; q < d.nq; ++q) {
        const auto D = d.gradient(e, q);
        std::array<Mat3, NArgs> grad;
        for (int k = 0; k < NArgs; ++k) grad[k] = ue[k].transpose() * D;
        const Mat3 t = kernel(grad);
        fe.noalias() += d.wdet[static_cast<std::size_t>(e) * d.nq + q] * D * t.transpose();
      }
    }
  });
  Vec out = Vec::Zero(d.nfree);
  for (int e = 0; e < ne; ++e) {
    const int* conn = d.mesh.element(e);
    const double* fe = buffer.data() + static_cast<std::size_t>(e) * npe * 3;
    for (int a = 0; a < npe; ++a)
      for (int i = 0; i < 3; ++i) {
        const Index g = d.free_map[static_cast<std::size_t>(3 * conn[a] + i)];
        if (g >= 0) out(g) += fe[a * 3 + i];
      }
  }
  return out;
}

}  // namespace

FeModel::FeModel(Mesh mesh, Material material, const std::vector<std::string>& clamp_sets, FeOptions options) {
  mesh.validate();
  material.validate();
  auto d = std::make_shared<Data>();
  d->mesh = std::move(mesh);
  d->material = material;
  d->lambda = material.lame_lambda();
  d->mu = material.lame_mu();
  d->npe = nodes_per_element(d->mesh.kind);

  std::set<int> clamped_nodes;
  for (const auto& name : clamp_sets) {
    auto it = d->mesh.node_sets.find(name);
    if (it == d->mesh.node_sets.end()) throw ConfigError("mesh has no node set named '" + name + "'");
    clamped_nodes.insert(it->second.begin(), it->second.end());
  }
  const Index total = 3 * static_cast<Index>(d->mesh.node_count());
  d->free_map.assign(static_cast<std::size_t>(total), -1);
  for (int n = 0; n < d->mesh.node_count(); ++n)
    for (int i = 0; i < 3; ++i) {
      const Index g = 3 * n + i;
      if (clamped_nodes.count(n)) {
        d->constrained.push_back(g);
      } else {
        d->free_map[static_cast<std::size_t>(g)] = d->nfree++;
      }
    }

  const auto rule = stiffness_rule(d->mesh.kind, options.quadrature_extra);
  d->nq = static_cast<int>(rule.size());
  const int ne = d->mesh.element_count();
  d->grads.resize(static_cast<std::size_t>(ne) * d->nq * d->npe * 3);
  d->wdet.resize(static_cast<std::size_t>(ne) * d->nq);
  std::vector<Eigen::MatrixXd> ref_grads;
  for (const auto& qp : rule) ref_grads.push_back(shape_gradients(d->mesh.kind, qp.xi));
  std::vector<int> bad(static_cast<std::size_t>(ne), 0);
  for (int e = 0; e < ne; ++e) {
    const Eigen::MatrixXd x = element_coords(d->mesh, e);
    for (int q = 0; q < d->nq; ++q) {
      const Mat3 jac = x.transpose() * ref_grads[static_cast<std::size_t>(q)];
      const double det = jac.determinant();
      if (!(det > 0.0)) throw ConfigError("non-positive Jacobian in element " + std::to_string(e));
      const Eigen::MatrixXd dx = ref_grads[static_cast<std::size_t>(q)] * jac.inverse();
      const std::size_t off = (static_cast<std::size_t>(e) * d->nq + q) * d->npe * 3;
      for (int a = 0; a < d->npe; ++a)
        for (int j = 0; j < 3; ++j) d->grads[off + static_cast<std::size_t>(a * 3 + j)] = dx(a, j);
      d->wdet[static_cast<std::size_t>(e) * d->nq + q] = rule[static_cast<std::size_t>(q)].weight * det;
    }
  }
  data_ = std::move(d);
}

const Mesh& FeModel::mesh() const { return data_->mesh; }
const Material& FeModel::material() const { return data_->material; }
Index FeModel::total_dof_count() const { return static_cast<Index>(data_->free_map.size()); }
Index FeModel::free_dof_count() const { return data_->nfree; }
const std::vector<Index>& FeModel::constrained_dofs() const { return data_->constrained; }

Index FeModel::free_index(int node, int component) const {
  if (node < 0 || node >= data_->mesh.node_count() || component < 0 || component > 2)
    throw DimensionError("node/component outside the mesh");
  return data_->free_map[static_cast<std::size_t>(3 * node + component)];
}

Vec FeModel::expand(const Vec& free) const {
  if (free.size() != data_->nfree) throw DimensionError("expand: vector length differs from free DOF count");
  Vec out = Vec::Zero(total_dof_count());
  for (Index g = 0; g < total_dof_count(); ++g) {
    const Index f = data_->free_map[static_cast<std::size_t>(g)];
    if (f >= 0) out(g) = free(f);
  }
  return out;
}

Vec FeModel::restrict(const Vec& total) const {
  if (total.size() != total_dof_count()) throw DimensionError("restrict: vector length differs from total DOF count");
  Vec out(data_->nfree);
  for (Index g = 0; g < total_dof_count(); ++g) {
    const Index f = data_->free_map[static_cast<std::size_t>(g)];
    if (f >= 0) out(f) = total(g);
  }
  return out;
}

std::pair<SparseSymmetricMatrix, SparseSymmetricMatrix> FeModel::assemble_linear() const {
  const Data& d = *data_;
  const int ne = d.mesh.element_count();
  const int npe = d.npe;
  const int nd = 3 * npe;
  const auto mrule = mass_rule(d.mesh.kind);
  std::vector<Eigen::VectorXd> mN;
  std::vector<Eigen::MatrixXd> mG;
  for (const auto& qp : mrule) {
    mN.push_back(shape_values(d.mesh.kind, qp.xi));
    mG.push_back(shape_gradients(d.mesh.kind, qp.xi));
  }

  std::vector<Triplet> kt, mt;
  const std::size_t per_elem = static_cast<std::size_t>(nd) * nd;
  constexpr int kBlock = 4096;
  std::vector<double> kbuf, mbuf;
  for (int b0 = 0; b0 < ne; b0 += kBlock) {
    const int b1 = std::min(ne, b0 + kBlock);
    kbuf.assign(static_cast<std::size_t>(b1 - b0) * per_elem, 0.0);
    mbuf.assign(static_cast<std::size_t>(b1 - b0) * npe * npe, 0.0);
    const std::size_t chunks = (static_cast<std::size_t>(b1 - b0) + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t c) {
      const int e0 = b0 + static_cast<int>(c) * kChunk;
      const int e1 = std::min(b1, e0 + kChunk);
      for (int e = e0; e < e1; ++e) {
        Eigen::Map<Eigen::MatrixXd> ke(kbuf.data() + static_cast<std::size_t>(e - b0) * per_elem, nd, nd);
        for (int q = 0; q < d.nq; ++q) {
          const auto D = d.gradient(e, q);
          const double w = d.wdet[static_cast<std::size_t>(e) * d.nq + q];
          const Eigen::MatrixXd dd = D * D.transpose();
          for (int a = 0; a < npe; ++a)
            for (int bn = 0; bn < npe; ++bn)
              for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                  double v = d.lambda * D(a, i) * D(bn, j) + d.mu * D(a, j) * D(bn, i);
                  if (i == j) v += d.mu * dd(a, bn);
                  ke(3 * a + i, 3 * bn + j) += w * v;
                }
        }
        Eigen::Map<Eigen::MatrixXd> me(mbuf.data() + static_cast<std::size_t>(e - b0) * npe * npe, npe, npe);
        const Eigen::MatrixXd x = element_coords(d.mesh, e);
        for (std::size_t q = 0; q < mrule.size(); ++q) {
          const double det = (x.transpose() * mG[q]).determinant();
          if (!(det > 0.0)) throw ConfigError("non-positive Jacobian in element " + std::to_string(e));
          me.noalias() += d.material.density * mrule[q].weight * det * mN[q] * mN[q].transpose();
        }
      }
    });
    for (int e = b0; e < b1; ++e) {
      const int* conn = d.mesh.element(e);
      const double* ke = kbuf.data() + static_cast<std::size_t>(e - b0) * per_elem;
      const double* me = mbuf.data() + static_cast<std::size_t>(e - b0) * npe * npe;
      for (int cb = 0; cb < nd; ++cb) {
        const Index gj = d.free_map[static_cast<std::size_t>(3 * conn[cb / 3] + cb % 3)];
        if (gj < 0) continue;
        for (int ra = 0; ra < nd; ++ra) {
          const Index gi = d.free_map[static_cast<std::size_t>(3 * conn[ra / 3] + ra % 3)];
          if (gi < 0 || gi > gj) continue;
          kt.emplace_back(static_cast<int>(gi), static_cast<int>(gj), ke[static_cast<std::size_t>(cb) * nd + ra]);
          if (ra % 3 == cb % 3)
            mt.emplace_back(static_cast<int>(gi), static_cast<int>(gj), me[static_cast<std::size_t>(cb / 3) * npe + ra / 3]);
        }
      }
    }
  }
  return {SparseSymmetricMatrix::from_triplets(d.nfree, mt), SparseSymmetricMatrix::from_triplets(d.nfree, kt)};
}

Vec FeModel::linear_force(const Vec& u) const {
  const Data& d = *data_;
  return assemble_force<1>(*this, d, {&u}, [&d](const std::array<Mat3, 1>& g) { return d.stress(sym(g[0])); });
}

Vec FeModel::quadratic_force(const Vec& a, const Vec& b) const {
  const Data& d = *data_;
  return assemble_force<2>(*this, d, {&a, &b}, [&d](const std::array<Mat3, 2>& g) {
    const Mat3 t = 0.5 * d.stress(ens(g[0], g[1])) + 0.5 * g[0] * d.stress(sym(g[1])) +
                   0.5 * g[1] * d.stress(sym(g[0]));
    return t;
  });
}

Vec FeModel::cubic_force(const Vec& a, const Vec& b, const Vec& c) const {
  const Data& d = *data_;
  return assemble_force<3>(*this, d, {&a, &b, &c}, [&d](const std::array<Mat3, 3>& g) {
    const Mat3 t = g[0] * d.stress(ens(g[1], g[2])) + g[1] * d.stress(ens(g[2], g[0])) +
                   g[2] * d.stress(ens(g[0], g[1]));
    return Mat3(t / 6.0);
  });
}

Vec FeModel::full_internal_force(const Vec& u) const {
  const Data& d = *data_;
  return assemble_force<1>(*this, d, {&u}, [&d](const std::array<Mat3, 1>& g) {
    const Mat3 f = Mat3::Identity() + g[0];
    const Mat3 green = 0.5 * (f.transpose() * f - Mat3::Identity());
    return Mat3(f * d.stress(green));
  });
}

model::MechanicalSystem FeModel::to_system() const {
  auto [m, k] = assemble_linear();
  const FeModel self = *this;
  model::NonlinearOperators ops;
  ops.quadratic = [self](const Vec& a, const Vec& b) { return self.quadratic_force(a, b); };
  ops.cubic = [self](const Vec& a, const Vec& b, const Vec& c) { return self.cubic_force(a, b, c); };
  ops.full = [self](const Vec& u) { return self.full_internal_force(u); };
  return model::MechanicalSystem(std::move(m), std::move(k), std::move(ops), data_->constrained, total_dof_count());
}

int FeModel::nearest_node(const std::array<double, 3>& point) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int n = 0; n < data_->mesh.node_count(); ++n) {
    const auto& x = data_->mesh.nodes[static_cast<std::size_t>(n)];
    const double dist = (x[0] - point[0]) * (x[0] - point[0]) + (x[1] - point[1]) * (x[1] - point[1]) +
                        (x[2] - point[2]) * (x[2] - point[2]);
    if (dist < best_d) {
      best_d = dist;
      best = n;
    }
  }
  return best;
}

}  // namespace dnf::fe
