#include "fairhub/pidreg/registry.hpp"

#include "fairhub/error.hpp"
#include "fairhub/util/crypto.hpp"
#include "fairhub/util/csv.hpp"
#include "fairhub/util/text.hpp"

#include <set>

namespace fairhub::pidreg {
namespace {

constexpr std::string_view kSuffixAlphabet = "0123456789abcdefghijklmnopqrstuvwxyz";
constexpr std::size_t kSuffixLength = 12;
constexpr std::string_view kTanAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
constexpr std::size_t kTanLength = 8;

std::string key_of(std::string_view prefix, std::string_view suffix) {
    std::string key(prefix);
    key.push_back('/');
    key.append(suffix);
    return key;
}

} // namespace

std::string_view to_string(ObjectKind kind) noexcept {
    switch (kind) {
        case ObjectKind::Article: return "Article";
        case ObjectKind::Antibody: return "Antibody";
        case ObjectKind::MouseLine: return "MouseLine";
        case ObjectKind::CellLine: return "CellLine";
        case ObjectKind::Notebook: return "Notebook";
        case ObjectKind::Dataset: return "Dataset";
        case ObjectKind::LabelSet: return "LabelSet";
    }
    return "Dataset";
}

std::optional<ObjectKind> parse_object_kind(std::string_view text) noexcept {
    for (const auto k : {ObjectKind::Article, ObjectKind::Antibody, ObjectKind::MouseLine,
                         ObjectKind::CellLine, ObjectKind::Notebook, ObjectKind::Dataset,
                         ObjectKind::LabelSet}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

void to_json(nlohmann::json& j, const PersistentIdentifier& p) {
    j = nlohmann::json{{"prefix", p.prefix},
                       {"suffix", p.suffix},
                       {"handle", p.handle()},
                       {"target_url", p.target_url},
                       {"created_at", to_micros(p.created_at)},
                       {"object_kind", std::string(to_string(p.object_kind))}};
    j["bound_object"] = p.bound_object ? nlohmann::json(*p.bound_object) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, PersistentIdentifier& p) {
    p.prefix = j.at("prefix").get<std::string>();
    p.suffix = j.at("suffix").get<std::string>();
    p.target_url = j.at("target_url").get<std::string>();
    p.created_at = from_micros(j.at("created_at").get<std::int64_t>());
    p.object_kind = parse_object_kind(j.at("object_kind").get<std::string>()).value_or(ObjectKind::Dataset);
    p.bound_object.reset();
    if (j.contains("bound_object") && !j["bound_object"].is_null()) {
        p.bound_object = j["bound_object"].get<std::string>();
    }
}

std::string tan_manifest_csv(const std::vector<TanIssue>& issues) {
    std::vector<csv::Row> rows{{"pid", "tan"}};
    for (const auto& issue : issues) {
        rows.push_back({issue.pid.handle(), issue.tan});
    }
    return csv::format(rows);
}

PidRegistry::PidRegistry(const Clock& clock, std::string landing_base_url, TransportFactory transports)
    : clock_(clock), landing_base_(std::move(landing_base_url)), transports_(std::move(transports)) {
    while (!landing_base_.empty() && landing_base_.back() == '/') {
        landing_base_.pop_back();
    }
}

void PidRegistry::add_endpoint(Endpoint endpoint) {
    if (endpoint.name.empty() || !valid_prefix(endpoint.prefix) ||
        (endpoint.base_url != "embedded" && !text::is_absolute_url(endpoint.base_url))) {
        throw Error(Errc::ValidationError, "endpoint needs a name, a valid prefix and an absolute base URL");
    }
    std::lock_guard lock(mutex_);
    for (auto& e : endpoints_) {
        if (e.name == endpoint.name) {
            e = std::move(endpoint);
            transport_cache_.erase(e.name);
            return;
        }
    }
    endpoints_.push_back(std::move(endpoint));
}

std::vector<Endpoint> PidRegistry::endpoints() const {
    std::lock_guard lock(mutex_);
    return endpoints_;
}

void PidRegistry::assign(ObjectKind kind, std::string_view endpoint) {
    std::lock_guard lock(mutex_);
    for (const auto& e : endpoints_) {
        if (e.name == endpoint || e.base_url == endpoint) {
            assignments_[kind] = e.name;
            return;
        }
    }
    throw Error(Errc::UnknownEndpoint, "no PID endpoint named " + std::string(endpoint));
}

std::map<ObjectKind, std::string> PidRegistry::assignments() const {
    std::lock_guard lock(mutex_);
    return assignments_;
}

std::string PidRegistry::prefix_for(ObjectKind kind) const {
    std::lock_guard lock(mutex_);
    if (const auto it = assignments_.find(kind); it != assignments_.end()) {
        for (const auto& e : endpoints_) {
            if (e.name == it->second) return e.prefix;
        }
    }
    if (endpoints_.empty()) {
        throw Error(Errc::PrefixNotConfigured, "no PID endpoint configured");
    }
    return endpoints_.front().prefix;
}

const Endpoint& PidRegistry::endpoint_for_prefix_locked(std::string_view prefix, ObjectKind kind) const {
    if (const auto it = assignments_.find(kind); it != assignments_.end()) {
        for (const auto& e : endpoints_) {
            if (e.name == it->second && e.prefix == prefix) return e;
        }
    }
    for (const auto& e : endpoints_) {
        if (e.prefix == prefix) return e;
    }
    throw Error(Errc::PrefixNotConfigured, "PID prefix not configured: " + std::string(prefix));
}

HandleClient PidRegistry::client_locked(const Endpoint& endpoint) {
    auto& slot = transport_cache_[endpoint.name];
    if (!slot) {
        slot = transports_(endpoint);
    }
    return HandleClient(slot);
}

std::string PidRegistry::fresh_suffix_locked(const std::string& prefix, HandleClient& client) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::string suffix = crypto::random_string(kSuffixLength, kSuffixAlphabet);
        if (records_.contains(key_of(prefix, suffix))) continue;
        if (client.get(prefix, suffix)) continue;
        return suffix;
    }
    throw Error(Errc::Internal, "could not allocate a fresh PID suffix");
}

PersistentIdentifier PidRegistry::mint_locked(const std::string& prefix, std::string_view target_url,
                                              ObjectKind kind, TargetMode mode) {
    const Endpoint& endpoint = endpoint_for_prefix_locked(prefix, kind);
    auto client = client_locked(endpoint);
    PersistentIdentifier pid;
    pid.prefix = prefix;
    pid.suffix = fresh_suffix_locked(prefix, client);
    switch (mode) {
        case TargetMode::Given: pid.target_url = std::string(target_url); break;
        case TargetMode::Pending: pid.target_url = landing_base_ + "/pending/" + pid.handle(); break;
        case TargetMode::Landing: pid.target_url = landing_url(pid.prefix, pid.suffix); break;
    }
    pid.created_at = clock_.now();
    pid.object_kind = kind;
    client.put(pid.prefix, pid.suffix, pid.target_url);
    records_.emplace(pid.handle(), pid);
    return pid;
}

PersistentIdentifier PidRegistry::mint_pid(std::string_view prefix, std::string_view target_url,
                                           ObjectKind kind) {
    if (!text::is_absolute_url(target_url)) {
        throw Error(Errc::InvalidUrl, "target URL must be absolute: " + std::string(target_url));
    }
    std::lock_guard lock(mutex_);
    return mint_locked(std::string(prefix), target_url, kind, TargetMode::Given);
}

PersistentIdentifier PidRegistry::mint_bound(ObjectKind kind, std::string_view object_id) {
    const std::string prefix = prefix_for(kind);
    std::lock_guard lock(mutex_);
    const PersistentIdentifier pid = mint_locked(prefix, {}, kind, TargetMode::Landing);
    auto& stored = records_.at(pid.handle());
    stored.bound_object = std::string(object_id);
    return stored;
}

PersistentIdentifier PidRegistry::mint_bound(ObjectKind kind, std::string_view object_id,
                                             std::string_view target_url) {
    if (!text::is_absolute_url(target_url)) {
        throw Error(Errc::InvalidUrl, "target URL must be absolute: " + std::string(target_url));
    }
    const std::string prefix = prefix_for(kind);
    std::lock_guard lock(mutex_);
    const PersistentIdentifier pid = mint_locked(prefix, target_url, kind, TargetMode::Given);
    auto& stored = records_.at(pid.handle());
    stored.bound_object = std::string(object_id);
    return stored;
}

std::optional<PersistentIdentifier> PidRegistry::find_bound(std::string_view object_id) const {
    std::lock_guard lock(mutex_);
    for (const auto& [handle, pid] : records_) {
        if (pid.bound_object == object_id) return pid;
    }
    return std::nullopt;
}

PersistentIdentifier PidRegistry::resolve_pid(std::string_view prefix, std::string_view suffix) const {
    std::lock_guard lock(mutex_);
    const auto it = records_.find(key_of(prefix, suffix));
    if (it == records_.end()) {
        throw Error(Errc::UnknownPid, "unknown PID " + key_of(prefix, suffix));
    }
    return it->second;
}

std::optional<PersistentIdentifier> PidRegistry::find(std::string_view handle) const {
    std::lock_guard lock(mutex_);
    const auto it = records_.find(std::string(handle));
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

PersistentIdentifier& PidRegistry::record_locked(std::string_view prefix, std::string_view suffix) {
    const auto it = records_.find(key_of(prefix, suffix));
    if (it == records_.end()) {
        throw Error(Errc::UnknownPid, "unknown PID " + key_of(prefix, suffix));
    }
    return it->second;
}

void PidRegistry::push_target_locked(PersistentIdentifier& pid, std::string_view url) {
    if (pid.target_url == url) return;
    const Endpoint& endpoint = endpoint_for_prefix_locked(pid.prefix, pid.object_kind);
    auto client = client_locked(endpoint);
    client.put(pid.prefix, pid.suffix, url);
    pid.target_url = std::string(url);
}

PersistentIdentifier PidRegistry::update_target(std::string_view prefix, std::string_view suffix,
                                                std::string_view new_url) {
    std::lock_guard lock(mutex_);
    auto& pid = record_locked(prefix, suffix);
    if (!text::is_absolute_url(new_url)) {
        throw Error(Errc::InvalidUrl, "target URL must be absolute: " + std::string(new_url));
    }
    push_target_locked(pid, new_url);
    return pid;
}

PersistentIdentifier PidRegistry::bind(std::string_view prefix, std::string_view suffix,
                                       std::string_view object_id) {
    std::lock_guard lock(mutex_);
    auto& pid = record_locked(prefix, suffix);
    if (pid.bound_object && *pid.bound_object != object_id) {
        throw Error(Errc::PidAlreadyBound, "PID " + pid.handle() + " is already bound");
    }
    push_target_locked(pid, landing_url(prefix, suffix));
    pid.bound_object = std::string(object_id);
    return pid;
}

std::vector<TanIssue> PidRegistry::mint_tan_batch(std::string_view prefix, std::size_t count,
                                                  ObjectKind kind) {
    if (count < 1) {
        throw Error(Errc::InvalidArgument, "TAN batch count must be at least 1");
    }
    std::lock_guard lock(mutex_);
    std::vector<TanIssue> issues;
    issues.reserve(count);
    std::set<std::string> batch_tans;
    for (std::size_t i = 0; i < count; ++i) {
        PersistentIdentifier pid = mint_locked(std::string(prefix), {}, kind, TargetMode::Pending);
        std::string tan;
        do {
            tan = crypto::random_string(kTanLength, kTanAlphabet);
        } while (!batch_tans.insert(tan).second);
        tans_[pid.handle()] = TanRecord{pid.handle(), crypto::salted_digest(tan), false, std::nullopt, std::nullopt};
        issues.push_back(TanIssue{std::move(pid), std::move(tan)});
    }
    return issues;
}

void PidRegistry::consume_tan(std::string_view prefix, std::string_view suffix, std::string_view tan,
                              const UserId& user) {
    std::lock_guard lock(mutex_);
    const std::string key = key_of(prefix, suffix);
    if (!records_.contains(key)) {
        throw Error(Errc::UnknownPid, "unknown PID " + key);
    }
    const auto it = tans_.find(key);
    if (it == tans_.end()) {
        throw Error(Errc::UnknownPid, "PID " + key + " carries no TAN");
    }
    auto& entry = it->second;
    if (entry.consumed) {
        throw Error(Errc::TanAlreadyConsumed, "TAN for " + key + " has already been used");
    }
    if (!crypto::verify_salted_digest(entry.tan_hash, tan)) {
        throw Error(Errc::TanMismatch, "TAN does not match " + key);
    }
    entry.consumed = true;
    entry.consumed_by = user;
    entry.consumed_at = clock_.now();
}

std::optional<TanRecord> PidRegistry::tan_record(std::string_view prefix, std::string_view suffix) const {
    std::lock_guard lock(mutex_);
    const auto it = tans_.find(key_of(prefix, suffix));
    if (it == tans_.end()) return std::nullopt;
    return it->second;
}

std::string PidRegistry::landing_url(std::string_view prefix, std::string_view suffix) const {
    return landing_base_ + "/landing/" + key_of(prefix, suffix);
}

std::size_t PidRegistry::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

nlohmann::json PidRegistry::to_json() const {
    std::lock_guard lock(mutex_);
    nlohmann::json endpoints = nlohmann::json::array();
    for (const auto& e : endpoints_) {
        endpoints.push_back({{"name", e.name}, {"base_url", e.base_url}, {"prefix", e.prefix}, {"credentials", e.credentials}});
    }
    nlohmann::json assignments = nlohmann::json::object();
    for (const auto& [kind, name] : assignments_) {
        assignments[std::string(to_string(kind))] = name;
    }
    nlohmann::json records = nlohmann::json::array();
    for (const auto& [key, pid] : records_) {
        records.push_back(pid);
    }
    nlohmann::json tans = nlohmann::json::array();
    for (const auto& [key, t] : tans_) {
        nlohmann::json entry{{"handle", t.handle}, {"tan_hash", t.tan_hash}, {"consumed", t.consumed}};
        entry["consumed_by"] = t.consumed_by ? nlohmann::json(t.consumed_by->str()) : nlohmann::json(nullptr);
        entry["consumed_at"] = t.consumed_at ? nlohmann::json(to_micros(*t.consumed_at)) : nlohmann::json(nullptr);
        tans.push_back(entry);
    }
    return {{"endpoints", endpoints}, {"assignments", assignments}, {"records", records}, {"tans", tans}};
}

void PidRegistry::load_json(const nlohmann::json& j) {
    std::lock_guard lock(mutex_);
    endpoints_.clear();
    assignments_.clear();
    transport_cache_.clear();
    records_.clear();
    tans_.clear();
    for (const auto& e : j.value("endpoints", nlohmann::json::array())) {
        endpoints_.push_back(Endpoint{e.at("name").get<std::string>(), e.at("base_url").get<std::string>(),
                                      e.at("prefix").get<std::string>(), e.value("credentials", std::string{})});
    }
    const auto assignments = j.value("assignments", nlohmann::json::object());
    for (const auto& [kind, name] : assignments.items()) {
        if (const auto k = parse_object_kind(kind)) assignments_[*k] = name.get<std::string>();
    }
    for (const auto& r : j.value("records", nlohmann::json::array())) {
        auto pid = r.get<PersistentIdentifier>();
        records_.emplace(pid.handle(), std::move(pid));
    }
    for (const auto& t : j.value("tans", nlohmann::json::array())) {
        TanRecord rec{t.at("handle").get<std::string>(), t.at("tan_hash").get<std::string>(), t.value("consumed", false),
                      std::nullopt, std::nullopt};
        if (t.contains("consumed_by") && !t["consumed_by"].is_null()) rec.consumed_by = UserId{t["consumed_by"].get<std::string>()};
        if (t.contains("consumed_at") && !t["consumed_at"].is_null()) rec.consumed_at = from_micros(t["consumed_at"].get<std::int64_t>());
        tans_.emplace(rec.handle, std::move(rec));
    }
}

} // namespace fairhub::pidreg
