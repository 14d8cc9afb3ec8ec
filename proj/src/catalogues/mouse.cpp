#include "fairhub/catalogues/mouse.hpp"

#include "common.hpp"

#include "fairhub/util/text.hpp"

namespace fairhub::catalogues {

using detail::opt;
using detail::opt_string;

std::string_view to_string(BreedingType b) noexcept {
    switch (b) {
        case BreedingType::Inbred: return "Inbred";
        case BreedingType::Outbred: return "Outbred";
        case BreedingType::Congenic: return "Congenic";
        case BreedingType::Coisogenic: return "Coisogenic";
        case BreedingType::F1Hybrid: return "F1Hybrid";
    }
    return "?";
}

std::string_view to_string(MutationKind m) noexcept {
    switch (m) {
        case MutationKind::TargetedMutation: return "TargetedMutation";
        case MutationKind::Transgene: return "Transgene";
        case MutationKind::KnockIn: return "KnockIn";
    }
    return "?";
}

std::string_view to_string(Sex s) noexcept { return s == Sex::F ? "F" : "M"; }

std::optional<BreedingType> parse_breeding_type(std::string_view s) noexcept {
    for (const auto b : {BreedingType::Inbred, BreedingType::Outbred, BreedingType::Congenic,
                         BreedingType::Coisogenic, BreedingType::F1Hybrid}) {
        if (to_string(b) == s) return b;
    }
    return std::nullopt;
}

std::optional<MutationKind> parse_mutation_kind(std::string_view s) noexcept {
    for (const auto m : {MutationKind::TargetedMutation, MutationKind::Transgene, MutationKind::KnockIn}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

std::optional<Sex> parse_sex(std::string_view s) noexcept {
    if (s == "F") return Sex::F;
    if (s == "M") return Sex::M;
    return std::nullopt;
}

bool valid_lab_code(std::string_view code) noexcept {
    if (code.size() < 2 || code[0] < 'A' || code[0] > 'Z') return false;
    for (std::size_t i = 1; i < code.size(); ++i) {
        if (code[i] < 'a' || code[i] > 'z') return false;
    }
    return true;
}

std::string generate_mouse_line_name(std::string_view background_strain, const std::vector<MutationSpec>& mutations) {
    std::string name(background_strain);
    for (std::size_t i = 0; i < mutations.size(); ++i) {
        const auto& m = mutations[i];
        if (!valid_lab_code(m.lab_code)) {
            throw Error(Errc::InvalidLabCode, "lab code \"" + m.lab_code + "\" must match [A-Z][a-z]+",
                        {{"mutation_index", i}});
        }
        if (m.serial < 1) {
            throw Error(Errc::InvalidArgument, "mutation serial must be at least 1", {{"mutation_index", i}});
        }
        name += i == 0 ? "-" : " ";
        if (m.kind == MutationKind::Transgene) {
            if (!m.construct || m.construct->empty()) {
                throw Error(Errc::MissingConstruct, "transgene without construct", {{"mutation_index", i}});
            }
            name += "Tg(" + *m.construct + ")" + std::to_string(m.serial) + m.lab_code;
        } else {
            name += m.gene_symbol + "<tm" + std::to_string(m.serial) + m.lab_code + ">";
        }
    }
    return name;
}

void to_json(nlohmann::json& j, const MutationSpec& m) {
    j = {{"gene_symbol", m.gene_symbol}, {"gene_ncbi_id", opt(m.gene_ncbi_id)}, {"mutation_kind", to_string(m.kind)},
         {"lab_code", m.lab_code},       {"serial", m.serial},                  {"construct", opt(m.construct)}};
}

void from_json(const nlohmann::json& j, MutationSpec& m) {
    m.gene_symbol = j.value("gene_symbol", std::string{});
    m.gene_ncbi_id = opt_string(j, "gene_ncbi_id");
    const auto kind = parse_mutation_kind(j.value("mutation_kind", std::string{}));
    if (!kind) {
        throw Error(Errc::ValidationError, "unknown mutation_kind", {{"fields", {"mutation_kind"}}});
    }
    m.kind = *kind;
    m.lab_code = j.value("lab_code", std::string{});
    m.serial = j.value("serial", 0);
    m.construct = opt_string(j, "construct");
}

void to_json(nlohmann::json& j, const MouseLine& l) {
    j = {{"line_id", l.line_id},
         {"background_strain", l.background_strain},
         {"breeding_type", to_string(l.breeding_type)},
         {"originating_lab", l.originating_lab},
         {"mpd_id", opt(l.mpd_id)},
         {"mutations", l.mutations},
         {"generated_name", l.generated_name},
         {"provenance", l.provenance},
         {"acl", l.acl},
         {"pid", opt(l.pid)}};
}

void from_json(const nlohmann::json& j, MouseLine& l) {
    l.line_id = MouseLineId{j.value("line_id", std::string{})};
    l.background_strain = j.value("background_strain", std::string{});
    const auto breeding = parse_breeding_type(j.value("breeding_type", std::string("Inbred")));
    if (!breeding) {
        throw Error(Errc::ValidationError, "unknown breeding_type", {{"fields", {"breeding_type"}}});
    }
    l.breeding_type = *breeding;
    l.originating_lab = j.value("originating_lab", std::string{});
    l.mpd_id = opt_string(j, "mpd_id");
    l.mutations = j.value("mutations", std::vector<MutationSpec>{});
    l.generated_name = j.value("generated_name", std::string{});
    l.provenance = j.value("provenance", std::string{});
    if (j.contains("acl")) l.acl = j["acl"].get<core::AccessScope>();
    if (j.contains("pid") && !j["pid"].is_null()) l.pid = j["pid"].get<pidreg::PersistentIdentifier>();
}

void to_json(nlohmann::json& j, const Mouse& m) {
    j = {{"mouse_id", m.mouse_id},
         {"line_id", m.line_id},
         {"name", m.name},
         {"sex", to_string(m.sex)},
         {"birth_date", format_date(m.birth_date)}};
}

void from_json(const nlohmann::json& j, Mouse& m) {
    m.mouse_id = j.at("mouse_id").get<MouseId>();
    m.line_id = j.at("line_id").get<MouseLineId>();
    m.name = j.at("name").get<std::string>();
    m.sex = parse_sex(j.at("sex").get<std::string>()).value_or(Sex::F);
    m.birth_date = parse_date(j.at("birth_date").get<std::string>()).value_or(Date{});
}

MouseLineCatalogue::MouseLineCatalogue(const core::Directory& directory, const Clock& clock,
                                       pidreg::PidRegistry* pids)
    : directory_(directory), clock_(clock), pids_(pids) {}

namespace {

std::string serial_key(const MutationSpec& m) {
    return m.kind == MutationKind::Transgene ? "tg:" + m.construct.value_or("") + "@" + m.lab_code
                                             : "tm:" + m.gene_symbol + "@" + m.lab_code;
}

} // namespace

void MouseLineCatalogue::prepare_locked(MouseLine& line, const MouseLine* previous) const {
    std::vector<std::string> bad;
    if (text::trim(line.background_strain).empty()) bad.emplace_back("background_strain");
    for (const auto& m : line.mutations) {
        if (text::trim(m.gene_symbol).empty()) {
            bad.emplace_back("mutations.gene_symbol");
            break;
        }
    }
    if (!line.acl.valid()) bad.emplace_back("acl");
    if (!bad.empty()) {
        throw Error(Errc::ValidationError, "invalid mouse line fields: " + text::join(bad, ", "), {{"fields", bad}});
    }
    // Per-key maximum over every other stored line; the line being edited
    // contributes only through the serials it still carries.
    std::map<std::string, int> highest;
    for (const auto& [id, other] : lines_) {
        if (previous && id == previous->line_id) continue;
        for (const auto& m : other.mutations) {
            auto& h = highest[serial_key(m)];
            h = std::max(h, m.serial);
        }
    }
    for (const auto& m : line.mutations) {
        if (m.serial > 0) {
            auto& h = highest[serial_key(m)];
            h = std::max(h, m.serial);
        }
    }
    for (auto& m : line.mutations) {
        if (m.kind != MutationKind::Transgene) m.construct.reset();
        if (m.serial == 0) m.serial = ++highest[serial_key(m)];
    }
    line.generated_name = generate_mouse_line_name(line.background_strain, line.mutations);
}

MouseLine MouseLineCatalogue::register_mouse_line(MouseLine data, const UserId& requester) {
    if (!directory_.is_project_user(requester)) {
        throw Error(Errc::AccessDenied, "only project users can register mouse lines");
    }
    if (!data.acl.owner && data.acl.scope != core::Scope::Group) data.acl.owner = requester;
    data.line_id = make_id<MouseLineId>();
    data.pid.reset();
    {
        std::lock_guard lock(mutex_);
        prepare_locked(data, nullptr);
        lines_[data.line_id] = data;
    }
    try {
        const auto pid = detail::mint_if_configured(pids_, pidreg::ObjectKind::MouseLine, data.line_id.str());
        std::lock_guard lock(mutex_);
        lines_[data.line_id].pid = pid;
        data.pid = pid;
    } catch (...) {
        std::lock_guard lock(mutex_);
        lines_.erase(data.line_id);
        throw;
    }
    return data;
}

MouseLine MouseLineCatalogue::update_mouse_line(MouseLine data, const std::optional<UserId>& requester) {
    std::lock_guard lock(mutex_);
    const auto it = lines_.find(data.line_id);
    if (it == lines_.end()) {
        throw Error(Errc::UnknownLine, "unknown mouse line " + data.line_id.str());
    }
    if (!directory_.can_modify(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "not allowed to edit mouse line " + data.line_id.str());
    }
    data.pid = it->second.pid;
    prepare_locked(data, &it->second);
    it->second = data;
    return data;
}

Mouse MouseLineCatalogue::add_mouse(const MouseLineId& line, std::string name, Sex sex, Date birth_date,
                                    const std::optional<UserId>& requester) {
    std::lock_guard lock(mutex_);
    const auto it = lines_.find(line);
    if (it == lines_.end()) {
        throw Error(Errc::UnknownLine, "unknown mouse line " + line.str());
    }
    if (!requester || !directory_.is_project_user(*requester) || !directory_.can_access(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "not allowed to add mice to line " + line.str());
    }
    if (!birth_date.ok()) {
        throw Error(Errc::ValidationError, "birth_date is not a calendar date", {{"fields", {"birth_date"}}});
    }
    if (std::chrono::sys_days{birth_date} > std::chrono::sys_days{to_date(clock_.now())}) {
        throw Error(Errc::FutureBirthDate, "birth date " + format_date(birth_date) + " lies in the future");
    }
    if (text::trim(name).empty()) {
        throw Error(Errc::ValidationError, "mouse name is empty", {{"fields", {"name"}}});
    }
    Mouse m{make_id<MouseId>(), line, std::move(name), sex, birth_date};
    mice_[m.mouse_id] = m;
    return m;
}

std::optional<Mouse> MouseLineCatalogue::find_mouse(const MouseId& id) const {
    std::lock_guard lock(mutex_);
    const auto it = mice_.find(id);
    if (it == mice_.end()) return std::nullopt;
    return it->second;
}

std::vector<Mouse> MouseLineCatalogue::mice(const MouseLineId& line) const {
    std::lock_guard lock(mutex_);
    std::vector<Mouse> out;
    for (const auto& [id, m] : mice_) {
        if (m.line_id == line) out.push_back(m);
    }
    return out;
}

MouseLine MouseLineCatalogue::get(const MouseLineId& id, const std::optional<UserId>& requester) const {
    std::lock_guard lock(mutex_);
    const auto it = lines_.find(id);
    if (it == lines_.end()) {
        throw Error(Errc::UnknownLine, "unknown mouse line " + id.str());
    }
    if (!directory_.can_access(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "mouse line " + id.str() + " is not visible to you");
    }
    return it->second;
}

std::optional<MouseLine> MouseLineCatalogue::find(const MouseLineId& id) const {
    std::lock_guard lock(mutex_);
    const auto it = lines_.find(id);
    if (it == lines_.end()) return std::nullopt;
    return it->second;
}

bool MouseLineCatalogue::exists(const MouseLineId& id) const {
    std::lock_guard lock(mutex_);
    return lines_.contains(id);
}

std::vector<MouseLine> MouseLineCatalogue::list(const std::optional<UserId>& requester, const std::string& q) const {
    std::lock_guard lock(mutex_);
    std::vector<MouseLine> out;
    for (const auto& [id, l] : lines_) {
        if (!directory_.can_access(requester, l.acl)) continue;
        if (!q.empty() && !text::icontains(l.generated_name, q) && !text::icontains(l.originating_lab, q)) continue;
        out.push_back(l);
    }
    return out;
}

nlohmann::json MouseLineCatalogue::to_json() const {
    std::lock_guard lock(mutex_);
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& [id, l] : lines_) lines.push_back(l);
    nlohmann::json mice = nlohmann::json::array();
    for (const auto& [id, m] : mice_) mice.push_back(m);
    return {{"lines", lines}, {"mice", mice}};
}

void MouseLineCatalogue::load_json(const nlohmann::json& j) {
    std::lock_guard lock(mutex_);
    lines_.clear();
    mice_.clear();
    for (const auto& l : j.value("lines", nlohmann::json::array())) {
        auto line = l.get<MouseLine>();
        lines_[line.line_id] = line;
    }
    for (const auto& m : j.value("mice", nlohmann::json::array())) {
        auto mouse = m.get<Mouse>();
        mice_[mouse.mouse_id] = mouse;
    }
}

} // namespace fairhub::catalogues
