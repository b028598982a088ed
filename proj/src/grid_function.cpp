#include "hus/grid_function.hpp"

#include "hus/error.hpp"

#include <algorithm>
#include <cmath>

namespace hus {

double point_norm(const Eigen::Ref<const Vec>& v, PointNorm kind) {
    if (v.size() == 0) return 0.0;
    if (kind == PointNorm::euclidean) return v.norm();
    return v.cwiseAbs().maxCoeff();
}

std::shared_ptr<const Grid> Grid::uniform(double t_max, std::size_t intervals) {
    if (!(t_max > 0.0) || intervals < 1)
        fail(Errc::invalid_argument, "uniform grid needs T_max > 0 and at least one interval");
    std::vector<double> t(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k)
        t[k] = t_max * static_cast<double>(k) / static_cast<double>(intervals);
    t.back() = t_max;
    return from_times(std::move(t));
}

std::shared_ptr<const Grid> Grid::from_times(std::vector<double> times,
                                             std::vector<std::size_t> kinks) {
    if (times.size() < 2) fail(Errc::invalid_argument, "grid needs at least two nodes");
    if (times.front() != 0.0) fail(Errc::invalid_argument, "grid must start at t = 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            fail(Errc::invalid_argument, "grid times must be strictly increasing");
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
    for (auto k : kinks)
        if (k >= times.size()) fail(Errc::invalid_argument, "kink index out of range");

    auto grid = std::shared_ptr<Grid>(new Grid());
    const double h0 = times[1] - times[0];
    bool uniform = true;
    for (std::size_t k = 1; k < times.size() && uniform; ++k)
        uniform = std::abs((times[k] - times[k - 1]) - h0) <= 1e-9 * h0;
    grid->times_ = std::move(times);
    grid->kinks_ = std::move(kinks);
    grid->uniform_ = uniform;
    return grid;
}

bool Grid::is_kink(std::size_t k) const {
    return std::binary_search(kinks_.begin(), kinks_.end(), k);
}

std::optional<std::size_t> Grid::find_node(double t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t * (1.0 - 1e-12) - 1e-300);
    for (; it != times_.end() && *it <= t * (1.0 + 1e-12) + 1e-300; ++it)
        if (std::abs(*it - t) <= 1e-12 * std::max(1.0, std::abs(t)))
            return static_cast<std::size_t>(it - times_.begin());
    return std::nullopt;
}

GridFunction::GridFunction(GridPtr grid, Mat values, std::optional<ExpTail> tail)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) fail(Errc::invalid_argument, "grid function needs a grid");
    if (static_cast<std::size_t>(values_.cols()) != grid_->size())
        fail(Errc::invalid_argument, "grid function: values length must equal grid length");
    set_tail(std::move(tail));
}

GridFunction GridFunction::zeros(GridPtr grid, Eigen::Index dim) {
    const auto n = static_cast<Eigen::Index>(grid->size());
    return GridFunction(std::move(grid), Mat::Zero(dim, n), ExpTail{Vec::Zero(dim), 1.0});
}

void GridFunction::set_tail(std::optional<ExpTail> tail) {
    if (tail) {
        if (!(tail->rate > 0.0) || !std::isfinite(tail->rate))
            fail(Errc::invalid_argument, "tail rate must be positive");
        if (tail->coefficient.size() != values_.rows())
            fail(Errc::invalid_argument, "tail coefficient dimension mismatch");
    }
    tail_ = std::move(tail);
}

bool GridFunction::is_real() const {
    if (!values_.imag().isZero(0.0)) return false;
    return !tail_ || tail_->coefficient.imag().isZero(0.0);
}

GridFunction GridFunction::pointwise_norm(PointNorm kind) const {
    Mat out(1, values_.cols());
    for (Eigen::Index k = 0; k < values_.cols(); ++k) out(0, k) = point_norm(values_.col(k), kind);
    std::optional<ExpTail> tail;
    if (tail_) tail = ExpTail{Vec::Constant(1, point_norm(tail_->coefficient, kind)), tail_->rate};
    return GridFunction(grid_, std::move(out), std::move(tail));
}

double GridFunction::sup_norm(PointNorm kind) const {
    double s = 0.0;
    for (Eigen::Index k = 0; k < values_.cols(); ++k) s = std::max(s, point_norm(values_.col(k), kind));
    if (tail_) s = std::max(s, point_norm(tail_->coefficient, kind));
    return s;
}

void GridFunction::check_compatible(const GridFunction& other) const {
    if (grid_ != other.grid_ && grid_->times() != other.grid_->times())
        fail(Errc::invalid_argument, "grid functions live on different grids");
    if (dim() != other.dim()) fail(Errc::invalid_argument, "grid function dimension mismatch");
}

std::optional<ExpTail> combine_tails(const std::optional<ExpTail>& a, Complex alpha,
                                     const std::optional<ExpTail>& b, Complex beta) {
    if (!a || !b) return std::nullopt;
    if (a->is_zero()) return ExpTail{beta * b->coefficient, b->rate};
    if (b->is_zero()) return ExpTail{alpha * a->coefficient, a->rate};
    return ExpTail{alpha * a->coefficient + beta * b->coefficient, std::min(a->rate, b->rate)};
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    check_compatible(other);
    values_ += other.values_;
    tail_ = combine_tails(tail_, 1.0, other.tail_, 1.0);
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    check_compatible(other);
    values_ -= other.values_;
    tail_ = combine_tails(tail_, 1.0, other.tail_, -1.0);
    return *this;
}

GridFunction& GridFunction::operator*=(Complex alpha) {
    values_ *= alpha;
    if (tail_) tail_->coefficient *= alpha;
    return *this;
}

}  // namespace hus
