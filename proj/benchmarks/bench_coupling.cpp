// Times the coupling-tensor construction: the per-entry serial reference
// against the harmonic production kernel at one and many threads, and checks
// that they build the same tensor.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "rotq/channel.hpp"
#include "rotq/channel_reference.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace rotq;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

double max_entry_diff(const ModeCoupling& a, const ModeCoupling& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.mat.size(); ++i) m = std::max(m, std::abs(a.mat[i] - b.mat[i]));
    return m;
}

template <typename F>
double timed(F&& f, ModeCoupling* out = nullptr) {
    double t0 = now_s();
    ModeCoupling c = f();
    double dt = now_s() - t0;
    if (out) *out = std::move(c);
    return dt;
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace

int main() {
    PolarGrid grid = make_grid();
    int hw = 1;
#ifdef _OPENMP
    hw = omp_get_max_threads();
#endif

    std::printf("%-34s %10s %10s %10s %9s\n", "case", "reference", "kernel x1",
                ("kernel x" + std::to_string(hw)).c_str(), "max diff");

    struct Case {
        const char* name;
        BasisSpec basis;
        MaskSpec mask;
        bool displacement = false;
    };
    BasisSpec small = make_basis(2, 3, 1.0, 7.9e3);
    BasisSpec full = make_basis(5, 8, 1.0, 7.9e3);

    Case cases[] = {
        {"phase screen, m<=2 p<=3", small,
         PhaseScreen{[](double r, double ph) { return 0.6 * r * std::cos(ph - 0.4); }}, false},
        {"offset aperture, m<=2 p<=3", small, CircularAperture{0.9, 0.05, 0.0}, false},
        {"displacement 0.5 w0, m<=2 p<=3", small, CircularAperture{1.0, 0.0, 0.0}, true},
    };

    for (const Case& c : cases) {
        ModeCoupling ref(c.basis), k1(c.basis), kn(c.basis);
        set_threads(1);
        double t_ref = timed(
            [&] {
                return c.displacement ? displacement_coupling_reference(0.5, 0.3, c.basis, grid)
                                      : mask_coupling_reference(c.mask, c.basis, grid);
            },
            &ref);
        double t_k1 = timed(
            [&] {
                return c.displacement ? displacement_coupling(0.5, 0.3, c.basis, grid)
                                      : mask_coupling(c.mask, c.basis, grid);
            },
            &k1);
        set_threads(hw);
        double t_kn = timed(
            [&] {
                return c.displacement ? displacement_coupling(0.5, 0.3, c.basis, grid)
                                      : mask_coupling(c.mask, c.basis, grid);
            },
            &kn);
        std::printf("%-34s %9.3fs %9.3fs %9.3fs %9.1e\n", c.name, t_ref, t_k1, t_kn,
                    std::max(max_entry_diff(ref, k1), max_entry_diff(k1, kn)));
    }

    // full-basis kernel timings (the reference would take minutes here)
    struct FullCase {
        const char* name;
        bool displacement;
        MaskSpec mask;
    };
    FullCase fulls[] = {
        {"phase screen, m<=5 p<=8 (kernel)", false,
         PhaseScreen{[](double r, double ph) { return 0.6 * r * std::cos(ph - 0.4); }}},
        {"displacement, m<=5 p<=8 (kernel)", true, CircularAperture{1.0, 0.0, 0.0}},
    };
    for (const FullCase& c : fulls) {
        ModeCoupling k1(full), kn(full);
        set_threads(1);
        double t_k1 = timed(
            [&] {
                return c.displacement ? displacement_coupling(0.5, 0.3, full, grid)
                                      : mask_coupling(c.mask, full, grid);
            },
            &k1);
        set_threads(hw);
        double t_kn = timed(
            [&] {
                return c.displacement ? displacement_coupling(0.5, 0.3, full, grid)
                                      : mask_coupling(c.mask, full, grid);
            },
            &kn);
        std::printf("%-34s %10s %9.3fs %9.3fs %9.1e\n", c.name, "-", t_k1, t_kn,
                    max_entry_diff(k1, kn));
    }
    std::printf(
        "\nnote: hard-edged masks (aperture row) converge slowly on the reference's plain\n"
        "tensor-product grid; its O(1/n_phi) edge error dominates that max diff. The\n"
        "production kernel integrates those arcs in closed form.\n");
    return 0;
}
