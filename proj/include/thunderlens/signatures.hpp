// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

// Function selectors and event topic hashes of the supported platforms.
// Shared by the default pattern registry and the synthetic-trace generator.
namespace thunderlens::sig {

// Flash loan providers
inline constexpr std::string_view kAaveFlashLoanFn = "0x5cffe9de";
inline constexpr std::string_view kAaveFlashLoanEvent = "0x5b8f46461c1dd69fb968f1a003acee221ea3e19540e350233b612ddb43433b55";
inline constexpr std::string_view kBzxFlashBorrowTokenFn = "0x66fa576f";
inline constexpr std::string_view kUniV2PairCreatedEvent = "0x0d3648bd0f6ba80134a33ba9275ac585d9d315f0ad8355cddefde31afa28d0e9";
inline constexpr std::string_view kUniV2SwapFn = "0x022c0d9f";
inline constexpr std::string_view kUniV2SwapEvent = "0xd78ad95fa46c994b6551d0da85fc275fe613ce37657fb8d5e3d130840159d822";
inline constexpr std::string_view kDydxLogOperate = "0x91b01baeee3a24b590d112613814d86801005c7ef9353e7fc1eaeaf33ccf83b0";
inline constexpr std::string_view kDydxLogWithdraw = "0xbc83c08f0b269b1726990c8348ffdf1ae1696244a14868d766e542a2f18cd7d4";
inline constexpr std::string_view kDydxLogCall = "0xab38cdc4a831ebe6542bf277d36b65dbc5c66a4d03ec6cf56ac38de05dc30098";
inline constexpr std::string_view kDydxLogDeposit = "0x2bad8bc95088af2c247b30fa2b2e6a0886f88625e0945cd3051008e0e270198f";

// Exchange
inline constexpr std::string_view kUniV1NewExchange = "0x9d42cb017eb05bd8944ab536a8b35bc68085931dd5f4356489801453923953f9";
inline constexpr std::string_view kUniV1TokenPurchase = "0xcd60aa75dea3072fbc07ae6d7d856b5dc5f4eee88854f5b4abf7b680ef8bc50f";
inline constexpr std::string_view kUniV1EthPurchase = "0x7f4091b46c33e918a0f3aa42307641d17bb67029427a5369e54b353984238705";
inline constexpr std::string_view kBalancerLogSwap = "0x908fb5ee8f16c6bc9bc3690973819f32a4d4b10188134543c88706e0e1d43378";
inline constexpr std::string_view kOneInchSwapFn = "0xf88309d7";
inline constexpr std::string_view kOneInchSwapped = "0xe2cee3f6836059820b673943853afebd9b3026125dab0d774284e6f28a4855be";
inline constexpr std::string_view kSynthetixExchange = "0xdb1741ffc6844b04a9284bb6337fb0ccfe543a493ef0ac8e725242201e93d4bd";
inline constexpr std::string_view kCurveTokenExchange = "0x8b3e96f2b889fa771c53c981b40daf005f63f637f1869f707052d15a3dd97140";
inline constexpr std::string_view kKyberExecuteTrade = "0x1849bd6a030a1bca28b83437fd3de96f3d27a5d172fa7e9c78e7b61468928a39";
inline constexpr std::string_view kKyberTrade = "0xd30ca399cb43507ecec6a629a35cf45eb98cda550c27696dcb0d8c4a3873ce6c";

// Lending & borrowing
inline constexpr std::string_view kAaveBorrow = "0x1e77446728e5558aa1b7e81e0cdab9cc1b075ba893b740600c76a315c2caa553";
inline constexpr std::string_view kAaveRepay = "0xb718f0b14f03d8c3adf35b15e3da52421b042ac879e5a689011a8b1e0036773d";
inline constexpr std::string_view kAaveDeposit = "0xc12c57b1c73a2c3a2ea4613e9476abb3d8d146857aab7329e24243fb59710c82";
inline constexpr std::string_view kAaveRedeemUnderlying = "0x9c4ed599cd8555b9c1e8cd7643240d7d71eb76b792948c49fcb4d411f7b6b3c6";
inline constexpr std::string_view kBzxBorrow = "0x86e15dd78cd784ab7788bcf5b96b9395e86030e048e5faedcfe752c700f6157e";
inline constexpr std::string_view kBzxRepay = "0x85dfc0033a3e5b3b9b3151bd779c1f9b855d66b83ff5bb79283b68d82e8e5b73";
inline constexpr std::string_view kBzxMint = "0xb4c03061fb5b7fed76389d5af8f2e0ddb09f8c70d1333abbb62582835e10accb";
inline constexpr std::string_view kBzxBurn = "0x743033787f4738ff4d6a7225ce2bd0977ee5f86b91a902a58f5e4d0b297b4644";
inline constexpr std::string_view kCompoundBorrow = "0x13ed6866d4e1ee6da46f845c46d7e54120883d75c5ea9a2dacc1c4ca8984ab80";
inline constexpr std::string_view kCompoundRepayBorrow = "0x1a2a22cb034d26d1854bdc6666a5b91fe25efbbb5dcad3b0355478d6f5c362a1";
inline constexpr std::string_view kCompoundMint = "0x4c209b5fc8ad50758f13e2e1088ba56a560dff690a1c6fef26394f4c03821c4f";
inline constexpr std::string_view kCompoundRedeem = "0xe5b754fb1abb7f01b499791d0b820ae3b6af3424ac1c59768edb53f4ec31a929";
inline constexpr std::string_view kMakerFrobFn = "0x76088703";
inline constexpr std::string_view kMakerFrobEvent = "0x7608870300000000000000000000000000000000000000000000000000000000";

// Margin trade (bZx pTokens)
inline constexpr std::string_view kBzxMintWithEtherA = "0x4e07008d";
inline constexpr std::string_view kBzxMintWithEtherB = "0xd24f22a9";
inline constexpr std::string_view kBzxMintWithTokenA = "0x39039497";
inline constexpr std::string_view kBzxMintWithTokenB = "0xf5acf904";
inline constexpr std::string_view kBzxMarginMint = "0x458f5fa412d0f69b08dd84872b0215675cc67bc1d5b6fd93300a1c3878b86196";

// Liquidation
inline constexpr std::string_view kAaveLiquidationCall = "0x56864757fd5b1fc9f38f5f3a981cd8ae512ce41b902cf73fc506ee369c6bc237";
inline constexpr std::string_view kCompoundLiquidateBorrow = "0x196893d3172b176a2d1d257008db8d8d97c8d19c485b21a653c309df6503262f";
inline constexpr std::string_view kDydxLogLiquidate = "0x1b9e65b359b871d74b1af1fc8b13b11635bfb097c4631b091eb762fda7e67dc7";
inline constexpr std::string_view kOpynLiquidate = "0xcab8e1abb9f8235c6db895cf185336dc9461aecf477b98c1be83687ee549e66a";

// Standard selectors used by the detectors (not platform-specific)
inline constexpr std::string_view kUniswapV2CallFn = "0x10d1e85c";  // uniswapV2Call(address,uint256,uint256,bytes)

// MakerDAO debt is always DAI; frob only carries the collateral ilk.
inline constexpr std::string_view kMakerDai = "0x6b175474e89094c44da98b954eedeac495271d0f";

// Default platform contracts
inline constexpr std::string_view kAaveLendingPool = "0x398ec7346dcd622edc5ae82352f02be94c62d119";
inline constexpr std::string_view kUniswapV2Factory = "0x5c69bee701ef814a2b6a3edd4b1652cb9cc5aa6f";
inline constexpr std::string_view kDydxSoloMargin = "0x1e0447b19bb6ecfdae1e4ae1694b0c3659614e4e";

}  // namespace thunderlens::sig
