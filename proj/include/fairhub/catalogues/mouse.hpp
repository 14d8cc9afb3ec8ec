/**
 * @file mouse.hpp
 * @brief Mouse-line catalogue, standardized line names and individual mice
 *
 * Line names follow a fixed subset of the mouse nomenclature rules:
 *
 *   name     := strain                      (no mutations)
 *             | strain "-" segment (" " segment)*
 *   segment  := Gene "<tm" serial Lab ">"   (targeted mutation, knock-in)
 *             | "Tg(" construct ")" serial Lab
 *   Lab      := [A-Z][a-z]+
 */

#pragma once

#include "fairhub/core/directory.hpp"
#include "fairhub/pidreg/registry.hpp"
#include "fairhub/util/clock.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fairhub::catalogues {

enum class BreedingType { Inbred, Outbred, Congenic, Coisogenic, F1Hybrid };
enum class MutationKind { TargetedMutation, Transgene, KnockIn };
enum class Sex { F, M };

[[nodiscard]] std::string_view to_string(BreedingType b) noexcept;
[[nodiscard]] std::string_view to_string(MutationKind m) noexcept;
[[nodiscard]] std::string_view to_string(Sex s) noexcept;
[[nodiscard]] std::optional<BreedingType> parse_breeding_type(std::string_view s) noexcept;
[[nodiscard]] std::optional<MutationKind> parse_mutation_kind(std::string_view s) noexcept;
[[nodiscard]] std::optional<Sex> parse_sex(std::string_view s) noexcept;

struct MutationSpec {
    std::string gene_symbol;
    std::optional<std::string> gene_ncbi_id;
    MutationKind kind = MutationKind::TargetedMutation;
    std::string lab_code;
    /// 0 asks the catalogue to assign the next free serial.
    int serial = 0;
    /// Transgenes only.
    std::optional<std::string> construct;

    friend bool operator==(const MutationSpec&, const MutationSpec&) = default;
};

[[nodiscard]] bool valid_lab_code(std::string_view code) noexcept;

/// Pure. Throws InvalidLabCode, MissingConstruct, or InvalidArgument for a
/// serial below 1.
[[nodiscard]] std::string generate_mouse_line_name(std::string_view background_strain,
                                                   const std::vector<MutationSpec>& mutations);

struct MouseLine {
    MouseLineId line_id;
    std::string background_strain;
    BreedingType breeding_type = BreedingType::Inbred;
    std::string originating_lab;
    std::optional<std::string> mpd_id;
    std::vector<MutationSpec> mutations;
    std::string generated_name;
    std::string provenance;
    core::AccessScope acl = core::AccessScope::make_project();
    std::optional<pidreg::PersistentIdentifier> pid;

    friend bool operator==(const MouseLine&, const MouseLine&) = default;
};

struct Mouse {
    MouseId mouse_id;
    MouseLineId line_id;
    std::string name;
    Sex sex = Sex::F;
    Date birth_date{};

    friend bool operator==(const Mouse&, const Mouse&) = default;
};

void to_json(nlohmann::json& j, const MutationSpec& m);
void from_json(const nlohmann::json& j, MutationSpec& m);
void to_json(nlohmann::json& j, const MouseLine& l);
void from_json(const nlohmann::json& j, MouseLine& l);
void to_json(nlohmann::json& j, const Mouse& m);
void from_json(const nlohmann::json& j, Mouse& m);

class MouseLineCatalogue {
public:
    MouseLineCatalogue(const core::Directory& directory, const Clock& clock, pidreg::PidRegistry* pids);

    /// Assigns missing serials per (gene or construct, lab) and stores the
    /// generated name.
    MouseLine register_mouse_line(MouseLine data, const UserId& requester);
    /// Re-derives serials that are unset and recomputes the name.
    MouseLine update_mouse_line(MouseLine data, const std::optional<UserId>& requester);

    Mouse add_mouse(const MouseLineId& line, std::string name, Sex sex, Date birth_date,
                    const std::optional<UserId>& requester);
    [[nodiscard]] std::vector<Mouse> mice(const MouseLineId& line) const;
    [[nodiscard]] std::optional<Mouse> find_mouse(const MouseId& id) const;

    [[nodiscard]] MouseLine get(const MouseLineId& id, const std::optional<UserId>& requester) const;
    [[nodiscard]] std::optional<MouseLine> find(const MouseLineId& id) const;
    [[nodiscard]] bool exists(const MouseLineId& id) const;
    [[nodiscard]] std::vector<MouseLine> list(const std::optional<UserId>& requester,
                                              const std::string& text = {}) const;

    [[nodiscard]] nlohmann::json to_json() const;
    void load_json(const nlohmann::json& j);

private:
    void prepare_locked(MouseLine& line, const MouseLine* previous) const;

    const core::Directory& directory_;
    const Clock& clock_;
    pidreg::PidRegistry* pids_;
    mutable std::mutex mutex_;
    std::map<MouseLineId, MouseLine> lines_;
    std::map<MouseId, Mouse> mice_;
};

} // namespace fairhub::catalogues
