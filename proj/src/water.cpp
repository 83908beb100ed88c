#include "canesim/water.hpp"

#include <algorithm>
#include <numeric>

namespace canesim {

namespace {

int find_crop(const WaterRequest& r, int crop) {
  for (std::size_t k = 0; k < r.crops.size(); ++k)
    if (r.crops[k] == crop) return static_cast<int>(k);
  return -1;
}

}  // namespace

std::vector<WaterAllocation> allocate_with_crop(double available_water,
                                                std::span<const WaterRequest> requests,
                                                std::span<const CropMarketInfo> crops) {
  // priority_of_crops = argsort(price * produce), most valuable first
  std::vector<std::size_t> priority(crops.size());
  std::iota(priority.begin(), priority.end(), std::size_t{0});
  std::sort(priority.begin(), priority.end(), [&](std::size_t a, std::size_t b) {
    double va = crops[a].price * crops[a].produce;
    double vb = crops[b].price * crops[b].produce;
    if (va != vb) return va > vb;
    return crops[a].crop < crops[b].crop;
  });

  for (std::size_t ci : priority) {
    const CropMarketInfo& info = crops[ci];
    double water = available_water;
    double sum_of_produce = 0.0;
    std::vector<WaterAllocation> allocation;

    // applicants for this crop, largest estimated produce first
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < requests.size(); ++j)
      if (find_crop(requests[j], info.crop) >= 0) order.push_back(j);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      double ea = requests[a].est_produce[static_cast<std::size_t>(find_crop(requests[a], info.crop))];
      double eb = requests[b].est_produce[static_cast<std::size_t>(find_crop(requests[b], info.crop))];
      if (ea != eb) return ea > eb;
      return requests[a].farmer < requests[b].farmer;
    });

    for (std::size_t j : order) {
      if (water <= 0.0) break;
      const WaterRequest& req = requests[j];
      auto k = static_cast<std::size_t>(find_crop(req, info.crop));
      double need = req.requirement[k];
      if (need <= water) {
        allocation.push_back({req.farmer, info.crop, need, 0.0, 0.0});
        water -= need;
        sum_of_produce += req.est_produce[k];
      } else {
        // partial: produce prorated by the water fraction actually granted
        sum_of_produce += req.est_produce[k] * water / need;
        allocation.push_back({req.farmer, info.crop, water, 0.0, 0.0});
        water = 0.0;
      }
    }

    if (sum_of_produce >= info.minimum_produce) return allocation;
    // minimum not met: discard this crop's allocation and try the next
  }
  return {};
}

std::vector<LenderAllocations> reallocate_round(std::span<const LenderPool> lenders,
                                                std::span<const WaterRequest> unserved,
                                                std::span<const CropMarketInfo> crops,
                                                std::span<const double> committed_produce) {
  std::vector<CropMarketInfo> adjusted(crops.begin(), crops.end());
  for (auto& c : adjusted) {
    double committed =
        c.crop >= 0 && static_cast<std::size_t>(c.crop) < committed_produce.size()
            ? committed_produce[static_cast<std::size_t>(c.crop)]
            : 0.0;
    c.minimum_produce = std::max(c.minimum_produce - committed, 0.0);
  }

  std::vector<LenderAllocations> out;
  std::vector<WaterRequest> remaining(unserved.begin(), unserved.end());
  for (const LenderPool& pool : lenders) {
    if (pool.available <= 0.0 || remaining.empty()) continue;
    auto allocations = allocate_with_crop(pool.available, remaining, adjusted);
    if (allocations.empty()) continue;
    for (const auto& a : allocations)
      std::erase_if(remaining, [&](const WaterRequest& r) { return r.farmer == a.farmer; });
    out.push_back({pool.lender, std::move(allocations)});
  }
  return out;
}

std::vector<WaterAllocation> water_agent_allocate(double available_water,
                                                  std::span<const ScalarWaterRequest> requests,
                                                  double unit_price) {
  std::vector<ScalarWaterRequest> ordered(requests.begin(), requests.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const ScalarWaterRequest& a, const ScalarWaterRequest& b) {
              return a.farmer < b.farmer;
            });
  std::vector<WaterAllocation> out;
  double water = available_water;
  for (const auto& r : ordered) {
    if (water <= 0.0) break;
    double grant = std::min(r.volume, water);
    if (grant <= 0.0) continue;
    out.push_back({r.farmer, -1, grant, 0.0, unit_price});
    water -= grant;
  }
  return out;
}

}  // namespace canesim
