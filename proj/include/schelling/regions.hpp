#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "schelling/lattice.hpp"

namespace schelling {

// ---------------------------------------------------------------------------
// Monochromatic balls

// M(u) = size of the largest single-state l-infinity ball containing u.
// Stored as the odd side 2*rho+1 of the optimal ball; the size is side^2.
// A fully monochromatic torus is capped at h^2 and flagged, since every
// wrapping ball is then trivially monochromatic.
struct MonoBallField {
  std::int32_t h = 0;
  bool full_mono = false;
  std::vector<std::int32_t> side;  // empty when full_mono

  std::int64_t size_at(std::int64_t u) const {
    if (full_mono) return std::int64_t(h) * h;
    const std::int64_t s = side[std::size_t(u)];
    return s * s;
  }
};

MonoBallField mono_ball_sizes(const TorusGrid& g);
std::int64_t monochromatic_ball_size(const TorusGrid& g, std::int64_t u);

// ---------------------------------------------------------------------------
// Good and bad blocks

// Disjoint m-blocks (side 2*floor(m/2)+1) laid out with one block centered
// at node (0,0). floor(h/side) blocks fit per axis; when side*count < h the
// leftover strip stays unclassified and the block lattice does not wrap.
struct BlockMap {
  std::int32_t m = 0;
  std::int32_t block_side = 0;
  std::int32_t blocks_per_axis = 0;
  std::int32_t h = 0;
  bool wraps = false;  // block lattice closes around the torus
  double epsilon = 0.0;
  std::vector<std::uint8_t> bad;  // row-major, blocks_per_axis^2

  bool is_bad(std::int32_t bi, std::int32_t bj) const {
    return bad[std::size_t(bi) * blocks_per_axis + bj] != 0;
  }
  // Center node of block (bi, bj).
  std::int32_t center_row(std::int32_t bi) const {
    return std::int32_t((std::int64_t(bi) * block_side) % h);
  }
  std::int32_t center_col(std::int32_t bj) const { return center_row(bj); }
};

// A block is good iff every window N_{floor(w/2)}(v) intersected with the
// block has theta-bar count W_I with W_I - N_I/2 < N^(1/2+eps).
BlockMap classify_blocks(const TorusGrid& g, std::int32_t m, double epsilon);

struct BadCluster {
  std::vector<std::pair<std::int32_t, std::int32_t>> blocks;
  std::pair<std::int32_t, std::int32_t> anchor;  // lexicographically smallest
  std::int32_t radius = 0;  // max block-lattice Chebyshev distance from anchor
};

// Connected components of bad blocks under 8-adjacency.
std::vector<BadCluster> bad_clusters(const BlockMap& bm);
std::vector<std::int32_t> bad_cluster_radii(const BlockMap& bm);

// ---------------------------------------------------------------------------
// Radical and p-stable regions

// Fewer than tau_hat*(1+eps')^2*N theta-particles in N_{floor((1+eps')w)}(center),
// with tau_hat = tau*(1 - 1/(tau*N^(1/2-eps))) and tau = tauN/N.
bool is_radical_region(const TorusGrid& g, const ThetaSums& sums,
                       std::int64_t center, double epsilon, double epsilon_prime);
bool is_radical_region(const TorusGrid& g, std::int64_t center, double epsilon,
                       double epsilon_prime);

// Counts p-stable theta-particles in N_{floor(eps'w)}(center); the bool is
// count >= floor(tau*eps'^2*N - N^(1/2+eps)), vacuously true when the
// threshold is not positive.
std::pair<std::int64_t, bool> count_p_stable_region(const TorusGrid& g,
                                                    const NeighborhoodCounts& cnt,
                                                    std::int64_t center,
                                                    double epsilon,
                                                    double epsilon_prime);

// ---------------------------------------------------------------------------
// Regions of expansion and cascades

// True iff for every w-block placement inside N_radius(center), flipping all
// the block's theta-particles to theta-bar leaves every theta-particle on
// the one-cell boundary ring p-stable. Evaluated by window sums, no mutation.
bool is_region_of_expansion(const TorusGrid& g, const ThetaSums& sums,
                            std::int64_t center, std::int32_t radius);
bool is_region_of_expansion(const TorusGrid& g, std::int64_t center,
                            std::int32_t radius);

// Repeatedly flips p-stable side-state particles inside the allowed mask
// until none remains; returns the flipped nodes in execution order. The
// result set is order-independent: each side->other flip only lowers the
// side-counts of the remaining side-particles, and p-stability of a
// side-particle is a downward-closed condition in its side-count, so
// eligibility is never destroyed, only created (this holds for every tauN;
// the tau > 1/2 case is the same closure seen through the tau-bar mapping).
std::vector<std::int64_t> cascade_closure(const TorusGrid& g,
                                          const std::vector<std::uint8_t>& allowed,
                                          bool side_theta);

struct ExpandableReport {
  bool expandable = false;
  std::int64_t center_node = -1;          // anchor block center
  std::int64_t affected_node = -1;        // first theta-affected node found in X2
  std::vector<std::int64_t> flips;        // cascade certificate, execution order
  std::int64_t x1_size = 0, x2_size = 0;  // mask sizes
};

// X1 = cluster nodes dilated by floor(N/4) in l-infinity; X2 = the next
// floor(N/4) shell. Runs the theta-cascade inside X1 and reports whether a
// node of X2 is theta-affected afterwards.
ExpandableReport is_expandable_region(const TorusGrid& g, const BlockMap& bm,
                                      const BadCluster& cluster);

// ---------------------------------------------------------------------------
// Firewalls

struct FirewallReport {
  bool ok = false;           // annulus is monochromatic
  std::int64_t margin = 0;   // min over annulus of worst_case_k - tauN + 1
  std::int64_t violating_node = -1;
  bool annulus_state = false;
  bool interior_monochromatic = false;  // interior matches the annulus state
  bool r_at_least_w_cubed = false;      // guarantee hypothesis, recorded only
  bool tau_in_theory_range = false;      // tau in (tau*, 1/2), recorded only
  std::int64_t annulus_size = 0;

  bool certified() const { return ok && interior_monochromatic && margin > 0; }
};

// Annulus r - sqrt(2)*w <= ||u - center||_2 <= r around a (possibly
// half-integer) center. worst_case_k(u) counts u plus the same-state sites
// of N_w(u) within the closed disc of radius r; everything outside the disc
// is assumed adversarial. margin > 0 with a monochromatic disc certifies
// that no disc particle can ever become unstable: the first disc flip would
// need a disc particle unstable while all disc states are still intact, but
// annulus particles then hold >= tauN in-disc matches and interior windows
// lie entirely inside the disc.
FirewallReport verify_firewall(const TorusGrid& g, double center_row,
                               double center_col, double r);

// ---------------------------------------------------------------------------
// Balance property

// Every length-ceil(w^(1/4)) width-1 segment (both orientations) clipped to
// N_radius(center) must satisfy W_I - N_I/2 < w^(1/8+eps).
bool balance_property(const TorusGrid& g, std::int64_t nbhd_center,
                      std::int32_t nbhd_radius, double epsilon);

// ---------------------------------------------------------------------------
// Scanning and reports

enum class RegionKind : std::uint8_t {
  good_block,
  bad_block,
  radical,
  p_stable_region,
  expandable,
  firewall,
  region_of_expansion,
};

struct RegionReport {
  RegionKind kind = RegionKind::radical;
  std::int64_t center = -1;
  std::int64_t radius_or_size = 0;
  nlohmann::json certificate;  // kind-specific payload; re-validates
};

const char* region_kind_name(RegionKind k);

// Scans centers outward from `from` in l-infinity rings (deterministic
// in-ring order) and returns the first match with its distance.
std::optional<std::pair<std::int64_t, std::int32_t>> nearest_region_scan(
    const TorusGrid& g, RegionKind kind, std::int64_t from,
    std::int32_t max_radius, double epsilon, double epsilon_prime);

// One JSON object per line.
std::string region_report_lines(const std::vector<RegionReport>& reports);
// good = 255, bad = 0.
void save_blockmap_pgm(const BlockMap& bm, const std::string& path);

}  // namespace schelling
