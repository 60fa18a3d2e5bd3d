#include "kgsim/generator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <thread>

#include "kgsim/csv.hpp"
#include "kgsim/random.hpp"

namespace kgsim {

std::string_view variant_name(Variant variant) {
  switch (variant) {
    case Variant::multiplex_param: return "multiplex_param";
    case Variant::multiplex_linear: return "multiplex_linear";
    case Variant::simplex_param: return "simplex_param";
    case Variant::simplex_linear: return "simplex_linear";
  }
  return "multiplex_param";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  throw std::invalid_argument(fmt::format("unknown variant '{}'", name));
}

std::vector<Role> GenerationConfig::active_roles() const {
  if (mode == GenerationMode::joint) return {Role::out, Role::in};
  return {role};
}

GenerationConfig GenerationConfig::homogeneous(std::uint32_t n, double beta, double alpha, double sigma,
                                               std::uint64_t steps, std::uint64_t seed) {
  GenerationConfig config;
  config.relationships.assign(n, RelationshipParameters{1.0 / n, {beta, alpha}, {beta, alpha}});
  config.sigma_out = sigma;
  config.sigma_in = sigma;
  config.steps = steps;
  config.seed = seed;
  return config;
}

void validate(const GenerationConfig& config) {
  if (config.relationships.empty()) throw DomainError("generation needs at least one relationship");
  double total = 0.0;
  for (std::size_t r = 0; r < config.relationships.size(); ++r) {
    const auto& rel = config.relationships[r];
    if (!(rel.rho >= 0.0)) throw DomainError(fmt::format("relationship {}: rho must be >= 0", r));
    total += rel.rho;
    for (Role role : config.active_roles()) {
      const auto& p = rel.role(role);
      if (!(p.beta >= 0.0 && p.beta < 1.0)) {
        throw DomainError(fmt::format("relationship {}: beta_{} = {} not in [0, 1)", r, role_name(role), p.beta));
      }
      if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) {
        throw DomainError(fmt::format("relationship {}: alpha_{} = {} not in [0, 1]", r, role_name(role), p.alpha));
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-6) throw DomainError(fmt::format("rho values sum to {}, expected 1", total));
  const auto n = static_cast<double>(config.relationships.size());
  for (Role role : config.active_roles()) {
    const double sigma = config.sigma(role);
    if (!(sigma > 0.0 && sigma <= 1.0)) {
      throw DomainError(fmt::format("sigma_{} = {} not in (0, 1]", role_name(role), sigma));
    }
    if (!(n > 1.0 / sigma - 1.0)) {
      throw DomainError(fmt::format("constraint n > 1/sigma - 1 violated: n = {}, sigma_{} = {} requires n > {:g}", n,
                                    role_name(role), sigma, 1.0 / sigma - 1.0));
    }
  }
}

namespace {

std::string_view mode_name(GenerationMode mode) { return mode == GenerationMode::joint ? "joint" : "single_role"; }

GenerationMode parse_mode(std::string_view name) {
  if (name == "joint") return GenerationMode::joint;
  if (name == "single_role") return GenerationMode::single_role;
  throw std::invalid_argument(fmt::format("unknown mode '{}'", name));
}

std::string_view exclusion_name(ExclusionScope scope) {
  return scope == ExclusionScope::relationship ? "relationship" : "relationship_role";
}

ExclusionScope parse_exclusion(std::string_view name) {
  if (name == "relationship") return ExclusionScope::relationship;
  if (name == "relationship_role") return ExclusionScope::relationship_role;
  throw std::invalid_argument(fmt::format("unknown exclusion scope '{}'", name));
}

}  // namespace

void to_json(nlohmann::json& out, const GenerationConfig& c) {
  auto rels = nlohmann::json::array();
  for (const auto& r : c.relationships) {
    rels.push_back({{"rho", r.rho},
                    {"out", {{"beta", r.out.beta}, {"alpha", r.out.alpha}}},
                    {"in", {{"beta", r.in.beta}, {"alpha", r.in.alpha}}}});
  }
  out = nlohmann::json{{"relationships", rels},
                       {"sigma", {{"out", c.sigma_out}, {"in", c.sigma_in}}},
                       {"steps", c.steps},
                       {"mode", mode_name(c.mode)},
                       {"role", role_name(c.role)},
                       {"variant", variant_name(c.variant)},
                       {"exclusion", exclusion_name(c.exclusion)},
                       {"seed", c.seed},
                       {"telemetry_interval", c.telemetry_interval}};
}

void from_json(const nlohmann::json& in, GenerationConfig& c) {
  c = GenerationConfig{};
  if (in.contains("homogeneous")) {
    const auto& h = in.at("homogeneous");
    const auto n = h.at("n").get<std::uint32_t>();
    if (n == 0) throw DomainError("homogeneous.n must be >= 1");
    const RoleParameters p{h.at("beta").get<double>(), h.value("alpha", 1.0)};
    c.relationships.assign(n, RelationshipParameters{1.0 / n, p, p});
  }
  if (in.contains("relationships")) {
    for (const auto& r : in.at("relationships")) {
      RelationshipParameters rel;
      rel.rho = r.at("rho").get<double>();
      auto read_role = [&](const char* name, RoleParameters& p) {
        if (r.contains(name)) {
          p.beta = r.at(name).at("beta").get<double>();
          p.alpha = r.at(name).value("alpha", 1.0);
        } else if (r.contains("beta")) {
          p.beta = r.at("beta").get<double>();
          p.alpha = r.value("alpha", 1.0);
        }
      };
      read_role("out", rel.out);
      read_role("in", rel.in);
      c.relationships.push_back(rel);
    }
  }
  if (in.contains("sigma")) {
    const auto& s = in.at("sigma");
    if (s.is_number()) {
      c.sigma_out = c.sigma_in = s.get<double>();
    } else {
      c.sigma_out = s.value("out", 1.0);
      c.sigma_in = s.value("in", 1.0);
    }
  }
  c.steps = in.value("steps", std::uint64_t{0});
  c.mode = parse_mode(in.value("mode", std::string("single_role")));
  c.role = parse_role(in.value("role", std::string("out")));
  c.variant = parse_variant(in.value("variant", std::string("multiplex_param")));
  c.exclusion = parse_exclusion(in.value("exclusion", std::string("relationship_role")));
  c.seed = in.value("seed", kDefaultSeed);
  c.telemetry_interval = in.value("telemetry_interval", std::uint64_t{0});
}

EntityId EntityRegistry::create(RelationId creator, std::uint64_t step) {
  if (creators_.size() >= kNoEntity) throw DomainError("entity id space exhausted");
  const auto id = static_cast<EntityId>(creators_.size());
  creators_.push_back(creator);
  created_at_.push_back(step);
  relationship_counts_.push_back(0);
  attachments_.emplace_back();
  return id;
}

bool EntityRegistry::attach(EntityId entity, RelationId relationship, Role role) {
  const bool fresh = !attached_any_role(entity, relationship);
  attachments_[entity].push_back(key(relationship, role));
  if (fresh) ++relationship_counts_[entity];
  return fresh;
}

bool EntityRegistry::attached(EntityId entity, RelationId relationship, Role role) const {
  const std::uint32_t k = key(relationship, role);
  for (std::uint32_t a : attachments_[entity]) {
    if (a == k) return true;
  }
  return false;
}

bool EntityRegistry::attached_any_role(EntityId entity, RelationId relationship) const {
  for (std::uint32_t a : attachments_[entity]) {
    if (a / 2 == relationship) return true;
  }
  return false;
}

std::uint64_t SimulationTelemetry::attached(const TelemetrySample& s, RelationId r, Role role) const {
  for (std::size_t slot = 0; slot < roles.size(); ++slot) {
    if (roles[slot] == role) return s.attached[r * roles.size() + slot];
  }
  throw std::invalid_argument(fmt::format("role {} not recorded", role_name(role)));
}

namespace {

constexpr int kRejectionAttempts = 64;
constexpr std::uint64_t kTimelineStream = 0;

std::uint64_t attach_stream(RelationId r, Role role) { return 1 + RelationId{2} * r + static_cast<std::uint64_t>(role); }

enum class Case : std::uint8_t { preferential, fresh, reuse };

/// Receives timeline events. `entity` is kNoEntity for preferential
/// attachment, which only the per-relationship index can resolve.
class TimelineHandler {
 public:
  virtual ~TimelineHandler() = default;
  virtual void on_attachment(RelationId r, Role role, EntityId entity) = 0;
  virtual void on_fact_done(RelationId r) = 0;
};

/// Draws relationships and attachment cases, resolves cases (b) and (c)
/// against the registry and keeps the telemetry counters.
class Timeline {
 public:
  explicit Timeline(const GenerationConfig& config)
      : config_(config),
        roles_(config.active_roles()),
        n_(config.relationship_count()),
        rng_(derive_seed(config.seed, kTimelineStream)),
        attached_(static_cast<std::size_t>(n_) * 2, 0),
        attached_any_(n_, 0),
        facts_(n_, 0),
        multiplicity_(static_cast<std::size_t>(n_) + 1, 0) {
    double total = 0.0;
    for (const auto& rel : config.relationships) cumulative_.push_back(total += rel.rho);
    telemetry_.roles = roles_;
    telemetry_.relationships = n_;
  }

  EntityRegistry& registry() { return registry_; }
  SimulationTelemetry& telemetry() { return telemetry_; }

  void run_seeding(TimelineHandler& handler) {
    for (RelationId r = 0; r < n_; ++r) {
      for (Role role : roles_) handler.on_attachment(r, role, create_and_attach(r, role, 0));
      ++facts_[r];
      handler.on_fact_done(r);
    }
    record(0);
  }

  void run_steps(TimelineHandler& handler) {
    const std::uint64_t steps = config_.steps;
    const std::uint64_t interval =
        config_.telemetry_interval > 0 ? config_.telemetry_interval : std::max<std::uint64_t>(1, steps / 100);
    for (std::uint64_t t = 1; t <= steps; ++t) {
      const RelationId r = draw_relationship();
      for (Role role : roles_) handler.on_attachment(r, role, step_role(r, role, t));
      ++facts_[r];
      handler.on_fact_done(r);
      if (t % interval == 0 || t == steps) record(t);
    }
  }

 private:
  RelationId draw_relationship() {
    const double x = uniform01(rng_) * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    return static_cast<RelationId>(std::min<std::ptrdiff_t>(it - cumulative_.begin(), n_ - 1));
  }

  EntityId step_role(RelationId r, Role role, std::uint64_t t) {
    const auto& p = config_.relationships[r].role(role);
    const double sigma = config_.sigma(role);
    const double u = uniform01(rng_);
    if (u < p.beta) return kNoEntity;
    if (u < p.beta + (1.0 - p.beta) * sigma) return create_and_attach(r, role, t);
    const EntityId reused = pick_unattached(r, role);
    if (reused == kNoEntity) {
      ++exceptional_;
      return create_and_attach(r, role, t);
    }
    attach(reused, r, role);
    return reused;
  }

  bool excluded(EntityId e, RelationId r, Role role) const {
    return config_.exclusion == ExclusionScope::relationship ? registry_.attached_any_role(e, r)
                                                             : registry_.attached(e, r, role);
  }

  EntityId pick_unattached(RelationId r, Role role) {
    const std::uint64_t m = registry_.size();
    const std::uint64_t taken = config_.exclusion == ExclusionScope::relationship
                                    ? attached_any_[r]
                                    : attached_[EntityRegistry::key(r, role)];
    if (taken >= m) return kNoEntity;
    for (int attempt = 0; attempt < kRejectionAttempts; ++attempt) {
      const auto e = static_cast<EntityId>(uniform_below(rng_, m));
      if (!excluded(e, r, role)) return e;
    }
    std::uint64_t pick = uniform_below(rng_, m - taken);
    for (EntityId e = 0; e < m; ++e) {
      if (excluded(e, r, role)) continue;
      if (pick-- == 0) return e;
    }
    throw std::logic_error("attachment counters out of sync with registry");
  }

  EntityId create_and_attach(RelationId r, Role role, std::uint64_t t) {
    const EntityId e = registry_.create(r, t);
    ++multiplicity_[0];
    attach(e, r, role);
    return e;
  }

  void attach(EntityId e, RelationId r, Role role) {
    const std::uint32_t before = registry_.relationship_count(e);
    if (registry_.attach(e, r, role)) {
      --multiplicity_[before];
      ++multiplicity_[before + 1];
      ++attached_any_[r];
    }
    ++attached_[EntityRegistry::key(r, role)];
  }

  void record(std::uint64_t t) {
    TelemetrySample s;
    s.t = t;
    s.entities = registry_.size();
    s.exceptional = exceptional_;
    s.attached.reserve(static_cast<std::size_t>(n_) * roles_.size());
    for (RelationId r = 0; r < n_; ++r) {
      for (Role role : roles_) s.attached.push_back(attached_[EntityRegistry::key(r, role)]);
    }
    s.facts = facts_;
    s.multiplicity = multiplicity_;
    telemetry_.samples.push_back(std::move(s));
  }

  const GenerationConfig& config_;
  std::vector<Role> roles_;
  std::uint32_t n_;
  Rng rng_;
  std::vector<double> cumulative_;
  EntityRegistry registry_;
  std::vector<std::uint64_t> attached_;
  std::vector<std::uint64_t> attached_any_;
  std::vector<std::uint64_t> facts_;
  std::vector<std::uint64_t> multiplicity_;
  std::uint64_t exceptional_ = 0;
  SimulationTelemetry telemetry_;
};

class PeakCounter {
 public:
  void add(std::int64_t delta) {
    const std::int64_t now = current_.fetch_add(delta) + delta;
    std::int64_t seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
  }
  std::uint64_t peak() const { return static_cast<std::uint64_t>(peak_.load()); }

 private:
  std::atomic<std::int64_t> current_{0};
  std::atomic<std::int64_t> peak_{0};
};

/// Resolves one (relationship, role) attachment against its index.
EntityId resolve(DegreeWeightedIndex& index, Rng& rng, EntityId entity, PeakCounter& peak) {
  if (entity == kNoEntity) {
    const std::size_t slot = index.sample(rng);
    index.increment(slot);
    return index.entity(slot);
  }
  index.add(entity);
  peak.add(1);
  return entity;
}

Edge make_edge(RelationId r, const EntityId (&sides)[2], GenerationMode mode, Role role) {
  if (mode == GenerationMode::joint) return {sides[0], r, sides[1]};
  return role == Role::out ? Edge{sides[0], r, kNoEntity} : Edge{kNoEntity, r, sides[1]};
}

/// Immediate resolution in timeline order.
class DirectHandler final : public TimelineHandler {
 public:
  DirectHandler(const GenerationConfig& config, std::vector<Edge>& edges, PeakCounter& peak)
      : config_(config), edges_(edges), peak_(peak) {
    const std::uint32_t n = config.relationship_count();
    for (RelationId r = 0; r < n; ++r) {
      for (Role role : {Role::out, Role::in}) {
        indexes_.emplace_back(config.relationships[r].role(role).alpha);
        rngs_.emplace_back(derive_seed(config.seed, attach_stream(r, role)));
      }
    }
  }

  void on_attachment(RelationId r, Role role, EntityId entity) override {
    const std::uint32_t k = EntityRegistry::key(r, role);
    sides_[static_cast<int>(role)] = resolve(indexes_[k], rngs_[k], entity, peak_);
  }

  void on_fact_done(RelationId r) override { edges_.push_back(make_edge(r, sides_, config_.mode, config_.role)); }

  std::vector<DegreeWeightedIndex>& indexes() { return indexes_; }

 private:
  const GenerationConfig& config_;
  std::vector<Edge>& edges_;
  PeakCounter& peak_;
  std::vector<DegreeWeightedIndex> indexes_;
  std::vector<Rng> rngs_;
  EntityId sides_[2] = {kNoEntity, kNoEntity};
};

/// Phase 1 of the per-relationship path: append events to per-relationship logs.
class LogHandler final : public TimelineHandler {
 public:
  LogHandler(std::uint32_t n, std::size_t roles) : logs_(n), roles_(roles) {}

  void on_attachment(RelationId r, Role, EntityId entity) override { logs_[r].push_back(entity); }
  void on_fact_done(RelationId) override {}

  /// logs[r] interleaves the active roles of every fact, in role order.
  std::vector<std::vector<EntityId>>& logs() { return logs_; }
  std::size_t roles() const { return roles_; }

 private:
  std::vector<std::vector<EntityId>> logs_;
  std::size_t roles_;
};

}  // namespace

SeededState seed(const GenerationConfig& config) {
  validate(config);
  Timeline timeline(config);
  std::vector<Edge> edges;
  PeakCounter peak;
  DirectHandler handler(config, edges, peak);
  timeline.run_seeding(handler);
  return {std::move(timeline.registry()), std::move(handler.indexes()), std::move(edges)};
}

GenerationResult generate(const GenerationConfig& config) {
  validate(config);
  GenerationResult result;
  result.edges.reserve(config.steps + config.relationships.size());
  PeakCounter peak;
  Timeline timeline(config);
  DirectHandler handler(config, result.edges, peak);
  timeline.run_seeding(handler);
  timeline.run_steps(handler);
  result.registry = std::move(timeline.registry());
  result.telemetry = std::move(timeline.telemetry());
  result.peak_index_entries = peak.peak();
  return result;
}

GenerationResult generate_per_relationship(const GenerationConfig& config, unsigned threads) {
  validate(config);
  const std::uint32_t n = config.relationship_count();
  const auto roles = config.active_roles();
  GenerationResult result;
  std::vector<std::vector<EntityId>> logs;
  {
    Timeline timeline(config);
    LogHandler handler(n, roles.size());
    timeline.run_seeding(handler);
    timeline.run_steps(handler);
    logs = std::move(handler.logs());
    result.registry = std::move(timeline.registry());
    result.telemetry = std::move(timeline.telemetry());
  }

  PeakCounter peak;
  std::vector<std::vector<Edge>> per_relationship(n);
  auto replay = [&](RelationId r) {
    std::vector<DegreeWeightedIndex> indexes;
    std::vector<Rng> rngs;
    for (Role role : roles) {
      indexes.emplace_back(config.relationships[r].role(role).alpha);
      rngs.emplace_back(derive_seed(config.seed, attach_stream(r, role)));
    }
    auto& log = logs[r];
    auto& out = per_relationship[r];
    out.reserve(log.size() / roles.size());
    EntityId sides[2] = {kNoEntity, kNoEntity};
    for (std::size_t at = 0; at < log.size(); at += roles.size()) {
      for (std::size_t slot = 0; slot < roles.size(); ++slot) {
        sides[static_cast<int>(roles[slot])] = resolve(indexes[slot], rngs[slot], log[at + slot], peak);
      }
      out.push_back(make_edge(r, sides, config.mode, config.role));
    }
    std::vector<EntityId>().swap(log);
    std::int64_t released = 0;
    for (const auto& index : indexes) released += static_cast<std::int64_t>(index.size());
    peak.add(-released);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, n));
  if (workers == 1) {
    for (RelationId r = 0; r < n; ++r) replay(r);
  } else {
    std::atomic<RelationId> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (RelationId r = next++; r < n; r = next++) replay(r);
      });
    }
  }

  std::size_t total = 0;
  for (const auto& edges : per_relationship) total += edges.size();
  result.edges.reserve(total);
  for (auto& edges : per_relationship) result.edges.insert(result.edges.end(), edges.begin(), edges.end());
  result.peak_index_entries = peak.peak();
  return result;
}

GenerationConfig ablation_variant(std::span<const RelationshipProfile> profiles, const GraphSummary& summary,
                                  Role role, Variant variant, std::uint64_t steps, std::uint64_t seed) {
  const auto& role_summary = summary.role(role);
  if (!role_summary) throw DomainError(fmt::format("no {} statistics available", role_name(role)));
  GenerationConfig config;
  config.mode = GenerationMode::single_role;
  config.role = role;
  config.variant = variant;
  config.steps = steps;
  config.seed = seed;

  const bool linear = variant == Variant::multiplex_linear || variant == Variant::simplex_linear;
  if (variant == Variant::multiplex_param || variant == Variant::multiplex_linear) {
    double total = 0.0;
    for (const auto& p : profiles) {
      if (p.role(role)) total += p.rho;
    }
    if (total <= 0.0) throw DomainError("no facts");
    for (const auto& p : profiles) {
      const auto& rp = p.role(role);
      if (!rp) continue;
      RelationshipParameters rel;
      rel.rho = p.rho / total;
      rel.role(role) = {rp->beta, linear ? 1.0 : rp->alpha};
      config.relationships.push_back(rel);
    }
    config.sigma_out = config.sigma_in = role_summary->sigma;
  } else {
    if (summary.facts == 0) throw DomainError("no facts");
    const double facts = static_cast<double>(summary.facts);
    const double beta = 1.0 - static_cast<double>(role_summary->entities) / facts;
    double alpha = 1.0;
    if (!linear && summary.facts >= 2) {
      alpha = fit_alpha(beta, facts, static_cast<double>(role_summary->max_degree)).alpha;
    }
    RelationshipParameters rel;
    rel.rho = 1.0;
    rel.role(role) = {beta, alpha};
    config.relationships.push_back(rel);
    config.sigma_out = config.sigma_in = 1.0;
  }
  return config;
}

std::vector<std::uint64_t> global_degrees(std::span<const Edge> edges, Role role) {
  std::vector<std::uint64_t> degrees;
  for (const Edge& edge : edges) {
    const EntityId e = edge.at(role);
    if (e == kNoEntity) continue;
    if (e >= degrees.size()) degrees.resize(std::max<std::size_t>(e + 1, degrees.size() * 2), 0);
    ++degrees[e];
  }
  return degrees;
}

void write_telemetry_csv(const std::filesystem::path& path, const SimulationTelemetry& telemetry) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  const bool joint = telemetry.roles.size() > 1;
  out << "t,m,exceptional";
  for (RelationId r = 0; r < telemetry.relationships; ++r) {
    for (Role role : telemetry.roles) {
      out << ",m_r" << r;
      if (joint) out << '_' << role_name(role);
    }
  }
  for (RelationId r = 0; r < telemetry.relationships; ++r) out << ",F_r" << r;
  for (std::uint32_t i = 1; i <= telemetry.relationships; ++i) out << ",M_" << i;
  out << '\n';
  for (const auto& s : telemetry.samples) {
    out << s.t << ',' << s.entities << ',' << s.exceptional;
    for (auto v : s.attached) out << ',' << v;
    for (auto v : s.facts) out << ',' << v;
    for (std::size_t i = 1; i < s.multiplicity.size(); ++i) out << ',' << s.multiplicity[i];
    out << '\n';
  }
  if (!out) throw IoError(fmt::format("write failed on '{}'", path.string()));
}

SimulationTelemetry read_telemetry_csv(const std::filesystem::path& path, std::uint32_t relationships,
                                       std::span<const Role> roles) {
  const auto table = csv::read(path);
  const std::size_t width = 3 + relationships * roles.size() + 2 * static_cast<std::size_t>(relationships);
  if (table.header.size() != width) {
    throw IoError(fmt::format("'{}' has {} columns, expected {}", path.string(), table.header.size(), width));
  }
  SimulationTelemetry telemetry;
  telemetry.roles.assign(roles.begin(), roles.end());
  telemetry.relationships = relationships;
  for (const auto& row : table.rows) {
    std::size_t col = 0;
    auto next = [&] { return std::stoull(row.at(col++)); };
    TelemetrySample s;
    s.t = next();
    s.entities = next();
    s.exceptional = next();
    for (std::size_t i = 0; i < relationships * roles.size(); ++i) s.attached.push_back(next());
    for (std::size_t i = 0; i < relationships; ++i) s.facts.push_back(next());
    s.multiplicity.push_back(0);
    for (std::size_t i = 0; i < relationships; ++i) s.multiplicity.push_back(next());
    telemetry.samples.push_back(std::move(s));
  }
  return telemetry;
}

}  // namespace kgsim
