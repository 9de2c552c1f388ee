#include "bohm/configspace/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace bohm::configspace::fft {

namespace {

struct PlanCache {
    std::mutex mutex;
    std::map<std::pair<std::vector<std::size_t>, int>, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }

    // The FFTW planner is not thread-safe; execution with new arrays is.
    fftw_plan get(const std::vector<std::size_t>& shape, int sign) {
        std::lock_guard lock(mutex);
        auto key = std::make_pair(shape, sign);
        if (auto it = plans.find(key); it != plans.end()) return it->second;
        std::size_t total = 1;
        for (auto n : shape) total *= n;
        auto* scratch = fftw_alloc_complex(total);
        std::vector<int> dims(shape.begin(), shape.end());
        fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), scratch, scratch, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        if (plan == nullptr) throw std::runtime_error("FFTW failed to create a plan");
        plans.emplace(std::move(key), plan);
        return plan;
    }
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

void run(std::span<cplx> data, const std::vector<std::size_t>& shape, int sign) {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(cache().get(shape, sign), p, p);
}

}  // namespace

void forward(std::span<cplx> data, const std::vector<std::size_t>& shape) { run(data, shape, FFTW_FORWARD); }
void backward(std::span<cplx> data, const std::vector<std::size_t>& shape) { run(data, shape, FFTW_BACKWARD); }

std::vector<std::size_t> shape_of(const Grid& grid) {
    std::vector<std::size_t> shape;
    for (const auto& ax : grid.axes()) shape.push_back(ax.points);
    return shape;
}

}  // namespace bohm::configspace::fft
