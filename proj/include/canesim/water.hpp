#pragma once

#include <span>
#include <vector>

namespace canesim {

// A Type1 farmer's application for water, parallel arrays over the crops the
// farmer is willing to plant with lent water.
struct WaterRequest {
  int farmer = -1;
  std::vector<int> crops;              // crop indices
  std::vector<double> requirement;     // water units needed for the full allocation
  std::vector<double> est_produce;     // quantity expected from the full allocation
  std::vector<double> land_willing;    // ha offered for that crop
};

struct WaterAllocation {
  int farmer = -1;
  int crop = -1;          // -1 when the lender does not dictate one
  double volume = 0.0;
  double produce_share = 0.0;  // payment to a Type3 lender
  double unit_price = 0.0;     // payment to the water agent
};

// Candidate crop as the lender sees it.
struct CropMarketInfo {
  int crop = -1;
  double price = 0.0;
  double produce = 0.0;          // per ha, ideal
  double minimum_produce = 0.0;  // locality quota; 0 means none
};

// Crop-dictating allocation: crops tried in descending price*produce order,
// farmers in descending estimated produce; a crop's allocation stands only if
// the (prorated) produce it gathers reaches the crop's minimum.
std::vector<WaterAllocation> allocate_with_crop(double available_water,
                                                std::span<const WaterRequest> requests,
                                                std::span<const CropMarketInfo> crops);

struct LenderPool {
  int lender = -1;        // farmer index
  double available = 0.0; // water units per step
};

struct LenderAllocations {
  int lender = -1;
  std::vector<WaterAllocation> allocations;
};

// One reallocation pass: each remaining lender in turn runs allocate_with_crop
// over the still-unserved requests, with each crop's minimum reduced by the
// produce already committed this step.
std::vector<LenderAllocations> reallocate_round(std::span<const LenderPool> lenders,
                                                std::span<const WaterRequest> unserved,
                                                std::span<const CropMarketInfo> crops,
                                                std::span<const double> committed_produce);

// The price-charging water agent: no crop preference, serves farmers in
// ascending id order until the water runs out.
struct ScalarWaterRequest {
  int farmer = -1;
  double volume = 0.0;
};
std::vector<WaterAllocation> water_agent_allocate(double available_water,
                                                  std::span<const ScalarWaterRequest> requests,
                                                  double unit_price);

}  // namespace canesim
