#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ppgnorm/cart.hpp"
#include "ppgnorm/error.hpp"
#include "ppgnorm/svm.hpp"

namespace ppgnorm {

enum class ClassifierKind { SvmLinear, SvmCubic, SvmGaussian, Cart };

inline constexpr std::array<std::pair<ClassifierKind, std::string_view>, 4> kClassifierNames{{
    {ClassifierKind::SvmLinear, "SvmLinear"},
    {ClassifierKind::SvmCubic, "SvmCubic"},
    {ClassifierKind::SvmGaussian, "SvmGaussian"},
    {ClassifierKind::Cart, "Cart"},
}};

constexpr std::string_view classifier_name(ClassifierKind kind) {
    for (const auto& [k, name] : kClassifierNames) {
        if (k == kind) return name;
    }
    return "Unknown";
}

inline std::optional<ClassifierKind> parse_classifier(std::string_view name) {
    for (const auto& [k, n] : kClassifierNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::SvmLinear;
    SvmParams svm;
    double gaussian_scale = 3.3;
    double poly_offset = 1.0;
    CartParams cart;

    KernelSpec kernel() const {
        KernelSpec k;
        k.gaussian_scale = gaussian_scale;
        k.poly_offset = poly_offset;
        switch (kind) {
            case ClassifierKind::SvmCubic: k.kind = KernelKind::PolynomialCubic; break;
            case ClassifierKind::SvmGaussian: k.kind = KernelKind::Gaussian; break;
            default: k.kind = KernelKind::Linear; break;
        }
        return k;
    }
};

using Model = std::variant<SvmModel, CartModel>;

// Labels are +1 (HighCL) / -1 (LowCL).
inline Model train_model(const ClassifierSpec& spec, std::span<const std::vector<double>> x,
                         std::span<const int> y) {
    if (spec.kind == ClassifierKind::Cart) return train_cart(x, y, spec.cart);
    return train_svm(x, y, spec.kernel(), spec.svm);
}

inline int predict_model(const Model& model, std::span<const double> x) {
    if (const auto* svm = std::get_if<SvmModel>(&model)) return predict_svm(*svm, x).label;
    return predict_cart(std::get<CartModel>(model), x);
}

inline std::string model_to_text(const Model& model) {
    return std::visit([](const auto& m) { return to_text(m); }, model);
}

}  // namespace ppgnorm
