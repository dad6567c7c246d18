#include "afnet/geo/tta.hpp"

#include <algorithm>

#include "afnet/core/errors.hpp"
#include "afnet/nn/layers.hpp"
#include "afnet/train/loss.hpp"

namespace afnet::geo {

std::vector<Dihedral> tta_transforms(const std::string& name) {
  const auto& g = dihedral_group();
  if (name == "none") return {Dihedral{}};
  if (name == "flips") return {Dihedral{}, Dihedral{true, 0}, Dihedral{true, 2}, Dihedral{false, 2}};
  if (name == "full") return {g.begin(), g.end()};
  throw ValidationError("unknown TTA set '" + name + "' (expected none, flips or full)");
}

template <typename T>
Tensor<T> transform_tensor(const Tensor<T>& x, Dihedral d) {
  if (x.shape().size() != 4) throw DimensionError("transform_tensor expects [N, C, H, W]");
  const auto& s = x.shape();
  std::int64_t oh = 0, ow = 0;
  auto data = apply_dihedral(x.to_vector(), s[0] * s[1], s[2], s[3], d, &oh, &ow);
  return Tensor<T>::from_data({s[0], s[1], oh, ow}, std::move(data));
}

template <typename T>
Tensor<T> tta_probabilities(const LogitsFn<T>& f, const Tensor<T>& image, const Tensor<T>& aux,
                            const std::vector<Dihedral>& transforms) {
  if (std::find(transforms.begin(), transforms.end(), Dihedral{}) == transforms.end()) {
    throw ContractError("TTA transform set must include the identity");
  }
  for (std::size_t i = 0; i < transforms.size(); ++i)
    for (std::size_t j = i + 1; j < transforms.size(); ++j)
      if (transforms[i] == transforms[j]) throw ContractError("TTA transform " + transforms[i].name() + " repeated");

  NoGradGuard guard;
  std::vector<T> sum;
  Shape shape;
  for (const auto& t : transforms) {
    const auto in = transform_tensor(image, t);
    const auto in_aux = aux.defined() ? transform_tensor(aux, t) : Tensor<T>();
    const auto probs = nn::softmax_over_classes(f(in, in_aux));
    const auto back = transform_tensor(probs, t.inverse());
    if (sum.empty()) {
      shape = back.shape();
      if (shape[0] != image.shape()[0] || shape[2] != image.shape()[2] || shape[3] != image.shape()[3]) {
        throw DimensionError("TTA: model output extent does not match its input");
      }
      sum.assign(back.data().begin(), back.data().end());
    } else {
      if (back.shape() != shape) throw DimensionError("TTA: model output shape changed between transforms");
      const auto& v = back.data();
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
    }
  }
  return Tensor<T>::from_data(shape, std::move(sum));
}

template <typename T>
LabelMap tta_predict(const LogitsFn<T>& f, const Tensor<T>& image, const Tensor<T>& aux,
                     const std::vector<Dihedral>& transforms) {
  return train::argmax_classes(tta_probabilities(f, image, aux, transforms));
}

#define AFNET_INSTANTIATE(T)                                                                                    \
  template Tensor<T> transform_tensor(const Tensor<T>&, Dihedral);                                              \
  template Tensor<T> tta_probabilities(const LogitsFn<T>&, const Tensor<T>&, const Tensor<T>&,                   \
                                       const std::vector<Dihedral>&);                                           \
  template LabelMap tta_predict(const LogitsFn<T>&, const Tensor<T>&, const Tensor<T>&, const std::vector<Dihedral>&);

AFNET_INSTANTIATE(float)
AFNET_INSTANTIATE(double)

#undef AFNET_INSTANTIATE

}  // namespace afnet::geo
