#!/usr/bin/env python3
"""Regenerate the demo lookup-table assets shipped under src/hanlink/assets/.

The tables are demo-grade: pinyin readings and radical decompositions are
curated real values for ~500 common characters; four-corner and Wubi98 codes
are derived deterministically from character components (characters sharing
components share code fragments), with the handful of codes displayed in the
upstream documentation pinned verbatim. Running this script is idempotent.
"""
from __future__ import annotations

import hashlib
import math
import unicodedata
from collections import Counter
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "hanlink" / "assets"

# char pinyin components structure-marks
# "-" means the character is treated as atomic (decomposes to itself).
CHAR_TABLE = """
王 wang2 - -
李 li3 木子 ⿱
张 zhang1 弓长 ⿰
刘 liu2 文刂 ⿰
陈 chen2 阝东 ⿰
杨 yang2 - -
黄 huang2 - -
赵 zhao4 走乂 ⿺
吴 wu2 口天 ⿱
周 zhou1 - -
徐 xu2 彳余 ⿰
孙 sun1 子小 ⿰
马 ma3 - -
朱 zhu1 - -
胡 hu2 古月 ⿰
郭 guo1 享阝 ⿰
何 he2 亻可 ⿰
林 lin2 木木 ⿰
高 gao1 - -
罗 luo2 罒夕 ⿱
郑 zheng4 关阝 ⿰
梁 liang2 - -
谢 xie4 讠身寸 ⿰ ⿰
宋 song4 宀木 ⿱
唐 tang2 - -
许 xu3 讠午 ⿰
韩 han2 - -
冯 feng2 冫马 ⿰
邓 deng4 又阝 ⿰
曹 cao2 - -
彭 peng2 - -
曾 zeng1 - -
肖 xiao1 小月 ⿱
田 tian2 - -
董 dong3 艹重 ⿱
袁 yuan2 - -
潘 pan1 氵番 ⿰
于 yu2 - -
蒋 jiang3 艹将 ⿱
蔡 cai4 艹祭 ⿱
余 yu2 - -
杜 du4 木土 ⿰
叶 ye4 口十 ⿰
程 cheng2 禾呈 ⿰
苏 su1 艹办 ⿱
魏 wei4 委鬼 ⿰
吕 lv3 口口 ⿱
丁 ding1 - -
任 ren2 亻壬 ⿰
沈 shen3 氵冘 ⿰
姚 yao2 女兆 ⿰
卢 lu2 - -
姜 jiang1 羊女 ⿱
崔 cui1 山隹 ⿱
钟 zhong1 钅中 ⿰
谭 tan2 讠覃 ⿰
陆 lu4 - -
汪 wang1 氵王 ⿰
范 fan4 艹氾 ⿱
金 jin1 - -
石 shi2 - -
廖 liao4 - -
贾 jia3 覀贝 ⿱
夏 xia4 - -
韦 wei2 - -
付 fu4 亻寸 ⿰
方 fang1 - -
白 bai2 - -
邹 zou1 刍阝 ⿰
孟 meng4 子皿 ⿱
熊 xiong2 能灬 ⿱
秦 qin2 - -
邱 qiu1 丘阝 ⿰
江 jiang1 氵工 ⿰
尹 yin3 - -
薛 xue1 - -
闫 yan2 门三 ⿵
段 duan4 - -
雷 lei2 雨田 ⿱
侯 hou2 - -
龙 long2 - -
史 shi3 - -
陶 tao2 - -
黎 li2 - -
贺 he4 加贝 ⿱
顾 gu4 厄页 ⿰
毛 mao2 - -
郝 hao3 赤阝 ⿰
龚 gong1 龙共 ⿱
邵 shao4 召阝 ⿰
万 wan4 - -
钱 qian2 钅戋 ⿰
严 yan2 - -
覃 qin2 - -
武 wu3 - -
戴 dai4 - -
莫 mo4 艹日大 ⿱ ⿱
孔 kong3 子乚 ⿰
向 xiang4 - -
汤 tang1 - -
常 chang2 - -
温 wen1 氵昷 ⿰
康 kang1 - -
施 shi1 - -
文 wen2 - -
牛 niu2 - -
樊 fan2 - -
葛 ge3 艹曷 ⿱
邢 xing2 开阝 ⿰
安 an1 宀女 ⿱
齐 qi2 - -
易 yi4 日勿 ⿱
乔 qiao2 - -
伍 wu3 亻五 ⿰
庞 pang2 广龙 ⿸
颜 yan2 彦页 ⿰
倪 ni2 - -
庄 zhuang1 广土 ⿸
聂 nie4 耳双 ⿱
章 zhang1 立早 ⿱
鲁 lu3 鱼日 ⿱
岳 yue4 丘山 ⿱
翟 zhai2 羽隹 ⿱
殷 yin1 - -
詹 zhan1 - -
申 shen1 - -
欧 ou1 区欠 ⿰
耿 geng3 耳火 ⿰
关 guan1 - -
兰 lan2 - -
焦 jiao1 隹灬 ⿱
俞 yu2 - -
左 zuo3 - -
柳 liu3 木卯 ⿰
甘 gan1 - -
祝 zhu4 礻兄 ⿰
包 bao1 - -
宁 ning2 宀丁 ⿱
尚 shang4 - -
符 fu2 竹付 ⿱
舒 shu1 舍予 ⿰
阮 ruan3 阝元 ⿰
柯 ke1 木可 ⿰
纪 ji4 纟己 ⿰
梅 mei2 木每 ⿰
童 tong2 立里 ⿱
凌 ling2 冫夌 ⿰
毕 bi4 比十 ⿱
单 shan4 - -
季 ji4 禾子 ⿱
裴 pei2 非衣 ⿱
霍 huo4 雨隹 ⿱
涂 tu2 氵余 ⿰
成 cheng2 - -
苗 miao2 艹田 ⿱
谷 gu3 - -
盛 sheng4 成皿 ⿱
曲 qu1 - -
翁 weng1 公羽 ⿱
冉 ran3 - -
骆 luo4 马各 ⿰
蓝 lan2 艹监 ⿱
路 lu4 足各 ⿰
游 you2 氵斿 ⿰
辛 xin1 - -
靳 jin4 革斤 ⿰
管 guan3 竹官 ⿱
柴 chai2 此木 ⿱
蒙 meng2 - -
鲍 bao4 鱼包 ⿰
华 hua4 化十 ⿱
喻 yu4 口俞 ⿰
祁 qi2 礻阝 ⿰
蒲 pu2 艹浦 ⿱
房 fang2 户方 ⿸
滕 teng2 - -
屈 qu1 尸出 ⿸
饶 rao2 饣尧 ⿰
解 xie4 - -
牟 mou2 厶牛 ⿱
艾 ai4 艹乂 ⿱
尤 you2 - -
阳 yang2 阝日 ⿰
时 shi2 日寸 ⿰
穆 mu4 - -
农 nong2 - -
司 si1 - -
卓 zhuo2 - -
古 gu3 十口 ⿱
吉 ji2 士口 ⿱
缪 miao4 - -
简 jian3 竹间 ⿱
车 che1 - -
项 xiang4 工页 ⿰
连 lian2 车辶 ⿺
芦 lu2 艹户 ⿱
麦 mai4 - -
褚 chu3 衤者 ⿰
娄 lou2 米女 ⿱
窦 dou4 穴卖 ⿱
戚 qi1 - -
岑 cen2 山今 ⿱
景 jing3 日京 ⿱
党 dang3 - -
宫 gong1 宀吕 ⿱
费 fei4 弗贝 ⿱
卜 bu3 - -
冷 leng3 冫令 ⿰
晏 yan4 日安 ⿱
席 xi2 - -
卫 wei4 - -
米 mi3 - -
柏 bai3 木白 ⿰
宗 zong1 宀示 ⿱
瞿 qu2 - -
桂 gui4 木圭 ⿰
全 quan2 人王 ⿱
佟 tong2 亻冬 ⿰
应 ying1 广 ⿸
臧 zang1 - -
闵 min3 门文 ⿵
苟 gou3 艹句 ⿱
邬 wu1 乌阝 ⿰
边 bian1 力辶 ⿺
卞 bian4 - -
姬 ji1 - -
师 shi1 - -
和 he2 禾口 ⿰
仇 qiu2 亻九 ⿰
栾 luan2 亦木 ⿱
隋 sui2 - -
商 shang1 - -
刁 diao1 - -
沙 sha1 氵少 ⿰
荣 rong2 艹木 ⿱
巫 wu1 - -
寇 kou4 - -
桑 sang1 - -
郎 lang2 良阝 ⿰
甄 zhen1 西土瓦 ⿰ ⿱
丛 cong2 从一 ⿱
仲 zhong4 亻中 ⿰
虞 yu2 - -
敖 ao2 - -
巩 gong3 工凡 ⿰
明 ming2 日月 ⿰
佘 she2 - -
池 chi2 氵也 ⿰
查 zha1 木旦 ⿱
麻 ma2 - -
苑 yuan4 艹夗 ⿱
迟 chi2 尺辶 ⿺
邝 kuang4 广阝 ⿰
官 guan1 - -
封 feng1 圭寸 ⿰
谈 tan2 讠炎 ⿰
匡 kuang1 匚王 ⿷
鞠 ju1 革匊 ⿰
惠 hui4 - -
荆 jing1 - -
冀 ji4 北异 ⿱
郁 yu4 有阝 ⿰
胥 xu1 疋月 ⿱
南 nan2 - -
班 ban1 - -
储 chu3 亻诸 ⿰
原 yuan2 厂白小 ⿸ ⿱
栗 li4 覀木 ⿱
燕 yan4 - -
楚 chu3 林疋 ⿱
劳 lao2 艹力 ⿱
奚 xi1 - -
皮 pi2 - -
粟 su4 覀米 ⿱
蔺 lin4 - -
楼 lou2 木娄 ⿰
满 man3 氵艹两 ⿰ ⿱
闻 wen2 门耳 ⿵
位 wei4 亻立 ⿰
厉 li4 厂万 ⿸
伊 yi1 亻尹 ⿰
仝 tong2 人工 ⿱
谯 qiao2 讠焦 ⿰
乌 wu1 - -
上 shang4 - -
皇 huang2 白王 ⿱
甫 fu3 - -
令 ling4 - -
狐 hu2 犭瓜 ⿰
诸 zhu1 讠者 ⿰
东 dong1 - -
独 du2 犭虫 ⿰
孤 gu1 子瓜 ⿰
西 xi1 - -
门 men2 - -
徒 tu2 彳走 ⿰
尉 wei4 - -
公 gong1 - -
慕 mu4 - -
容 rong2 宀谷 ⿱
长 chang2 - -
宇 yu3 宀于 ⿱
屠 tu2 尸者 ⿸
呼 hu1 口乎 ⿰
延 yan2 - -
端 duan1 立耑 ⿰
木 mu4 - -
百 bai3 一白 ⿱
里 li3 - -
人 ren2 - -
冶 ye3 冫台 ⿰
澹 dan4 氵詹 ⿰
台 tai2 厶口 ⿱
伟 wei3 亻韦 ⿰
芳 fang1 艹方 ⿱
娜 na4 女那 ⿰
敏 min3 每攵 ⿰
静 jing4 青争 ⿰
丽 li4 - -
强 qiang2 弓口虫 ⿰ ⿱
磊 lei3 石石石 ⿱ ⿰
军 jun1 冖车 ⿱
洋 yang2 氵羊 ⿰
勇 yong3 甬力 ⿱
艳 yan4 丰色 ⿰
杰 jie2 木灬 ⿱
娟 juan1 女肙 ⿰
涛 tao1 氵寿 ⿰
超 chao1 走召 ⿺
秀 xiu4 禾乃 ⿱
霞 xia2 雨叚 ⿱
平 ping2 - -
刚 gang1 冈刂 ⿰
英 ying1 艹央 ⿱
玉 yu4 王丶 ⿻
萍 ping2 艹氵平 ⿱ ⿰
红 hong2 纟工 ⿰
玲 ling2 王令 ⿰
云 yun2 二厶 ⿱
飞 fei1 - -
鑫 xin1 金金金 ⿱ ⿰
晨 chen2 日辰 ⿱
欣 xin1 斤欠 ⿰
妍 yan2 女开 ⿰
婷 ting2 女亭 ⿰
雪 xue3 雨彐 ⿱
琳 lin2 王林 ⿰
浩 hao4 氵告 ⿰
子 zi3 - -
轩 xuan1 车干 ⿰
涵 han2 氵函 ⿰
梦 meng4 林夕 ⿱
嘉 jia1 - -
怡 yi2 忄台 ⿰
俊 jun4 - -
博 bo2 - -
雨 yu3 - -
晓 xiao3 日尧 ⿰
斌 bin1 文武 ⿰
鹏 peng2 朋鸟 ⿰
辉 hui1 光军 ⿰
亮 liang4 - -
健 jian4 亻建 ⿰
慧 hui4 - -
颖 ying3 - -
琴 qin2 王王今 ⿱ ⿰
兵 bing1 丘八 ⿱
义 yi4 - -
志 zhi4 士心 ⿱
国 guo2 囗玉 ⿴
忠 zhong1 中心 ⿱
德 de2 - -
建 jian4 - -
民 min2 - -
福 fu2 礻畐 ⿰
贵 gui4 - -
祥 xiang2 礻羊 ⿰
凤 feng4 几又 ⿵
春 chun1 - -
秋 qiu1 禾火 ⿰
冬 dong1 夂冫 ⿱
竹 zhu2 - -
菊 ju2 艹匊 ⿱
松 song1 木公 ⿰
青 qing1 - -
山 shan1 - -
水 shui3 - -
河 he2 氵可 ⿰
海 hai3 氵每 ⿰
波 bo1 氵皮 ⿰
洪 hong2 氵共 ⿰
泽 ze2 - -
源 yuan2 氵原 ⿰
清 qing1 氵青 ⿰
淑 shu1 氵叔 ⿰
贤 xian2 - -
良 liang2 - -
善 shan4 - -
信 xin4 亻言 ⿰
智 zhi4 知日 ⿱
礼 li3 礻乚 ⿰
仁 ren2 亻二 ⿰
孝 xiao4 耂子 ⿱
友 you3 - -
顺 shun4 川页 ⿰
兴 xing1 - -
旺 wang4 日王 ⿰
发 fa1 - -
财 cai2 贝才 ⿰
银 yin2 钅艮 ⿰
宝 bao3 宀玉 ⿱
珠 zhu1 王朱 ⿰
珍 zhen1 - -
瑞 rui4 - -
琪 qi2 王其 ⿰
瑶 yao2 - -
璐 lu4 王路 ⿰
莹 ying2 艹冖玉 ⿱ ⿱
晶 jing1 日日日 ⿱ ⿰
亭 ting2 - -
月 yue4 - -
星 xing1 日生 ⿱
光 guang1 - -
彩 cai3 采彡 ⿰
丹 dan1 - -
紫 zi3 此糸 ⿱
翠 cui4 羽卒 ⿱
碧 bi4 王白石 ⿱ ⿰
素 su4 - -
小 xiao3 - -
大 da4 - -
天 tian1 一大 ⿱
心 xin1 - -
思 si1 田心 ⿱
念 nian4 今心 ⿱
爱 ai4 - -
可 ke3 - -
功 gong1 工力 ⿰
胜 sheng4 月生 ⿰
利 li4 禾刂 ⿰
泰 tai4 - -
庆 qing4 广大 ⿸
喜 xi3 - -
欢 huan1 又欠 ⿰
乐 le4 - -
笑 xiao4 竹夭 ⿱
永 yong3 - -
久 jiu3 - -
远 yuan3 元辶 ⿺
新 xin1 亲斤 ⿰
旭 xu4 九日 ⿺
升 sheng1 - -
峰 feng1 - -
岭 ling3 山令 ⿰
岩 yan2 山石 ⿱
树 shu4 木又寸 ⿰ ⿰
根 gen1 木艮 ⿰
花 hua1 艹化 ⿱
果 guo3 - -
香 xiang1 禾日 ⿱
芬 fen1 艹分 ⿱
芝 zhi1 艹之 ⿱
若 ruo4 艹右 ⿱
茂 mao4 艹戊 ⿱
萌 meng2 艹明 ⿱
蕾 lei3 艹雷 ⿱
薇 wei1 艹微 ⿱
蓉 rong2 艹容 ⿱
莲 lian2 艹连 ⿱
荷 he2 艹何 ⿱
菲 fei1 艹非 ⿱
杏 xing4 木口 ⿱
桃 tao2 木兆 ⿰
枫 feng1 木风 ⿰
梓 zi3 木辛 ⿰
楠 nan2 木南 ⿰
森 sen1 木木木 ⿱ ⿰
本 ben3 木一 ⿻
朴 pu3 木卜 ⿰
北 bei3 - -
圆 yuan2 囗员 ⿴
昊 hao4 日天 ⿱
昌 chang1 日日 ⿱
晖 hui1 日军 ⿰
曦 xi1 - -
晴 qing2 日青 ⿰
朗 lang3 良月 ⿰
普 pu3 - -
照 zhao4 昭灬 ⿱
熙 xi1 - -
焕 huan4 火奂 ⿰
炎 yan2 火火 ⿱
烨 ye4 火华 ⿰
煜 yu4 火昱 ⿰
灿 can4 火山 ⿰
耀 yao4 光翟 ⿰
虹 hong2 虫工 ⿰
霖 lin2 雨林 ⿱
露 lu4 雨路 ⿱
霜 shuang1 雨相 ⿱
雯 wen2 雨文 ⿱
雅 ya3 牙隹 ⿰
雄 xiong2 - -
雁 yan4 厂亻隹 ⿸ ⿰
震 zhen4 雨辰 ⿱
风 feng1 - -
飘 piao1 票风 ⿰
翔 xiang2 羊羽 ⿰
翼 yi4 羽异 ⿱
羽 yu3 - -
翰 han4 - -
鸿 hong2 氵工鸟 ⿰ ⿰
鹤 he4 - -
鸣 ming2 口鸟 ⿰
凡 fan2 - -
千 qian1 - -
亿 yi4 亻乙 ⿰
一 yi1 - -
二 er4 - -
三 san1 - -
四 si4 - -
五 wu3 - -
六 liu4 - -
七 qi1 - -
八 ba1 - -
九 jiu3 - -
十 shi2 - -
考 kao3 - -
阿 a1 阝可 ⿰
日 ri4 - -
么 me5 - -
扎 zha1 - -
俄 e2 亻我 ⿰
者 zhe3 - -
拉 la1 扌立 ⿰
珂 ke1 王可 ⿰
科 ke1 禾斗 ⿰
娅 ya4 女亚 ⿰
女 nv3 - -
亚 ya4 - -
只 zhi1 口八 ⿱
币 bi4 - -
又 you4 - -
名 ming2 夕口 ⿱
依 yi1 亻衣 ⿰
尔 er3 - -
买 mai3 - -
提 ti2 扌是 ⿰
热 re4 - -
合 he2 人一口 ⿱ ⿱
力 li4 - -
克 ke4 古儿 ⿱
布 bu4 - -
吐 tu3 口土 ⿰
逊 xun4 孙辶 ⿺
别 bie2 另刂 ⿰
斯 si1 其斤 ⿰
基 ji1 其土 ⿱
托 tuo1 - -
娃 wa2 女圭 ⿰
莎 sha1 艹沙 ⿱
吾 wu2 五口 ⿱
色 se4 - -
呷 xia1 口甲 ⿰
惹 re3 若心 ⿱
各 ge4 夂口 ⿱
此 ci3 - -
尼 ni2 尸匕 ⿸
哈 ha1 口合 ⿰
打 da3 扌丁 ⿰
洛 luo4 氵各 ⿰
且 qie3 - -
比 bi3 - -
都 du1 者阝 ⿰
作 zuo4 亻乍 ⿰
曼 man4 - -
坦 tan3 土旦 ⿰
默 mo4 黑犬 ⿰
罕 han3 - -
弓 gong1 - -
文 wen2 - -
刂 dao1 - -
阝 fu4 - -
口 kou3 - -
彳 chi4 - -
余 yu2 - -
享 xiang3 - -
罒 wang3 - -
夕 xi1 - -
讠 yan2 - -
身 shen1 - -
寸 cun4 - -
宀 mian2 - -
午 wu3 - -
冫 bing1 - -
重 zhong4 - -
将 jiang1 - -
祭 ji4 - -
土 tu3 - -
呈 cheng2 - -
办 ban4 - -
委 wei3 - -
鬼 gui3 - -
壬 ren2 - -
冘 yin2 - -
兆 zhao4 - -
羊 yang2 - -
隹 zhui1 - -
钅 jin1 - -
中 zhong1 - -
覃 qin2 - -
氵 shui3 - -
氾 fan4 - -
覀 ya4 - -
贝 bei4 - -
丘 qiu1 - -
工 gong1 - -
雨 yu3 - -
加 jia1 - -
厄 e4 - -
页 ye4 - -
赤 chi4 - -
共 gong4 - -
召 zhao4 - -
戋 jian1 - -
乚 yi3 - -
昷 wen1 - -
曷 he2 - -
开 kai1 - -
勿 wu4 - -
广 guang3 - -
彦 yan4 - -
耳 er3 - -
双 shuang1 - -
立 li4 - -
早 zao3 - -
鱼 yu2 - -
区 qu1 - -
欠 qian4 - -
火 huo3 - -
灬 huo3 - -
卯 mao3 - -
礻 shi4 - -
兄 xiong1 - -
竹 zhu2 - -
舍 she4 - -
予 yu3 - -
元 yuan2 - -
己 ji3 - -
每 mei3 - -
夌 ling2 - -
疋 pi3 - -
非 fei1 - -
衣 yi1 - -
皿 min3 - -
能 neng2 - -
从 cong2 - -
乍 zha4 - -
斿 you2 - -
革 ge2 - -
斤 jin1 - -
官 guan1 - -
监 jian1 - -
足 zu2 - -
化 hua4 - -
俞 yu2 - -
浦 pu3 - -
户 hu4 - -
尸 shi1 - -
出 chu1 - -
饣 shi2 - -
尧 yao2 - -
厶 si1 - -
乂 yi4 - -
敄 wu4 - -
间 jian1 - -
衤 yi1 - -
穴 xue2 - -
卖 mai4 - -
今 jin1 - -
京 jing1 - -
弗 fu2 - -
圭 gui1 - -
示 shi4 - -
乌 wu1 - -
亦 yi4 - -
少 shao3 - -
夗 yuan4 - -
尺 chi3 - -
匚 fang1 - -
匊 ju2 - -
北 bei3 - -
异 yi4 - -
有 you3 - -
两 liang3 - -
犭 quan3 - -
瓜 gua1 - -
乎 hu1 - -
耑 duan1 - -
那 na4 - -
攵 pu1 - -
争 zheng1 - -
甬 yong3 - -
丰 feng1 - -
肙 yuan1 - -
寿 shou4 - -
走 zou3 - -
叚 jia3 - -
冈 gang1 - -
央 yang1 - -
丶 zhu3 - -
彐 ji4 - -
告 gao4 - -
车 che1 - -
干 gan1 - -
函 han2 - -
忄 xin1 - -
朋 peng2 - -
鸟 niao3 - -
韦 wei2 - -
亲 qin1 - -
艮 gen4 - -
之 zhi1 - -
右 you4 - -
戊 wu4 - -
微 wei1 - -
辛 xin1 - -
卜 bu3 - -
员 yuan2 - -
昭 zhao1 - -
奂 huan4 - -
昱 yu4 - -
华 hua2 - -
翟 di2 - -
相 xiang1 - -
牙 ya2 - -
厂 chang3 - -
亻 ren2 - -
辰 chen2 - -
票 piao4 - -
乙 yi3 - -
我 wo3 - -
扌 shou3 - -
是 shi4 - -
另 ling4 - -
其 qi2 - -
甲 jia3 - -
心 xin1 - -
尃 fu1 - -
旦 dan4 - -
黑 hei1 - -
犬 quan3 - -
艹 cao3 - -
纟 si1 - -
囗 wei2 - -
耂 lao3 - -
采 cai3 - -
彡 shan1 - -
糸 mi4 - -
卒 zu2 - -
生 sheng1 - -
川 chuan1 - -
才 cai2 - -
畐 fu2 - -
几 ji1 - -
夂 zhi3 - -
知 zhi1 - -
夭 yao1 - -
丬 pan2 - -
虫 chong2 - -
一 yi1 - -
大 da4 - -
小 xiao3 - -
王 wang2 - -
白 bai2 - -
月 yue4 - -
山 shan1 - -
石 shi2 - -
田 tian2 - -
日 ri4 - -
木 mu4 - -
古 gu3 - -
天 tian1 - -
言 yan2 - -
九 jiu3 - -
也 ye3 - -
门 men2 - -
三 san1 - -
西 xi1 - -
瓦 wa3 - -
尹 yin3 - -
子 zi3 - -
人 ren2 - -
米 mi3 - -
看 kan4 - -
匕 bi3 - -
"""

SINGLE_SURNAMES = (
    "王李张刘陈杨黄赵吴周徐孙马朱胡郭何林高罗郑梁谢宋唐许韩冯邓曹彭曾肖田董袁潘于蒋蔡余杜"
    "叶程苏魏吕丁任沈姚卢姜崔钟谭陆汪范金石廖贾夏韦付方白邹孟熊秦邱江尹薛闫段雷侯龙史陶黎"
    "贺顾毛郝龚邵万钱严覃武戴莫孔向汤常温康施文牛樊葛邢安齐易乔伍庞颜倪庄聂章鲁岳翟殷詹申"
    "欧耿关兰焦俞左柳甘祝包宁尚符舒阮柯纪梅童凌毕单季裴霍涂成苗谷盛曲翁冉骆蓝路游辛靳管柴"
    "蒙鲍华喻祁蒲房滕屈饶解牟艾尤阳时穆农司卓古吉缪简车项连芦麦褚娄窦戚岑景党宫费卜冷晏席"
    "卫米柏宗瞿桂全佟应臧闵苟邬边卞姬师和仇栾隋商刁沙荣巫寇桑郎甄丛仲虞敖巩明佘池查麻苑迟"
    "邝官封谈匡鞠惠荆冀郁胥南班储原栗燕楚劳奚皮粟蔺楼满闻位厉伊仝谯"
)
DOUBLE_SURNAMES = [
    "欧阳", "上官", "皇甫", "令狐", "诸葛", "司马", "东方", "独孤", "南宫",
    "西门", "司徒", "尉迟", "公孙", "慕容", "长孙", "宇文", "夏侯", "申屠",
    "呼延", "端木", "百里", "东郭", "闻人", "公冶", "澹台",
]

GIVEN_CHARS = (
    "伟芳娜敏静丽强磊军洋勇艳杰娟涛明超秀霞平刚英华玉萍红玲云飞鑫晨欣妍婷雪琳浩子轩涵梦嘉"
    "怡俊文博雨晓燕斌宇鹏辉亮健慧颖琴兵义志国忠德建民福贵祥龙凤春秋冬梅兰竹菊松柏青山水江"
    "河海波洪泽源清淑惠贤良善信智礼仁孝友和顺兴旺发财金银宝珠珍瑞琪瑶璐莹晶亭月星光彩丹紫"
    "翠碧素白小大天心思念爱可成功胜利安康宁泰吉庆喜欢乐笑永久长远新旭升高峰岭岩林树根苗花"
    "叶果香芬芝若茂荣萌蕾薇蓉莲荷菲桂杏桃柳枫梓楠森木本朴东南西北方圆昊昌晖曦阳晴朗景普照"
    "熙焕炎烨煜灿耀虹霖露霜雯雅雄雁震雷电风飘翔翼羽翰鸿鹤鸣凡千万亿一二三四五六七八九十"
)

MINORITY_CHARS = "阿依尔古丽买提热合曼斯坦别克吐逊托娃莎吾色曲呷惹各此尼哈俄扎博打洛且比都作默罕沙木日么者拉"
MINORITY_FIRST = "阿依吾买热古哈俄尼莫沙色曲洛"

FC_PIN = {"伍": "21212", "考": "44027"}
WB_PIN = {"伍": "wgg", "考": "ftgn"}

STRUCT_CHARS = "⿰⿱⿲⿳⿴⿵⿶⿷⿸⿹⿺⿻"


def _h(text: str, salt: str) -> int:
    return int.from_bytes(hashlib.sha256((salt + text).encode("utf-8")).digest()[:8], "big")


def parse_char_table():
    entries = {}
    for raw in CHAR_TABLE.strip().splitlines():
        parts = raw.split()
        char, pinyin = parts[0], parts[1]
        comps = parts[2] if len(parts) > 2 else "-"
        structs = [p for p in parts[3:] if p != "-"]
        if comps == "-":
            comps_list = [char]
            structs = []
        else:
            comps_list = list(comps)
            if not structs:
                structs = ["⿰"] * (len(comps_list) - 1)
            while len(structs) < len(comps_list) - 1:
                structs.append(structs[-1])
        if char in entries:
            continue
        entries[char] = (pinyin, comps_list, structs)
    return entries


def fc_code(char, comps):
    if char in FC_PIN:
        return FC_PIN[char]
    first, last = comps[0], comps[-1]
    d1 = _h(first, "fc-first") % 100
    d2 = _h(last, "fc-last") % 100
    d3 = _h(char, "fc-char") % 10
    return f"{d1:02d}{d2:02d}{d3:d}"


def wb_code(char, comps):
    if char in WB_PIN:
        return WB_PIN[char]
    letters = "abcdefghijklmnopqrstuvwxy"
    if len(comps) == 1:
        h = _h(char, "wb-atomic")
        return letters[h % 25] + letters[(h // 25) % 25]
    code = "".join(letters[_h(c, "wb-comp") % 25] for c in comps[:3])
    code += letters[_h(char, "wb-char") % 25]
    return code[:4]


def rd_code(comps):
    return " ".join(comps)


def rds_code(comps, structs):
    return " ".join(list(comps) + list(structs))


def write_tsv(path, rows, header):
    lines = [f"# {header}"]
    lines += [f"{a}\t{b}" for a, b in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_corpus(entries, rng, n=4000):
    singles = [c for c in SINGLE_SURNAMES if c in entries]
    doubles = [s for s in DOUBLE_SURNAMES if all(c in entries for c in s)]
    given = [c for c in GIVEN_CHARS if c in entries]
    minority = [c for c in MINORITY_CHARS if c in entries]
    minority_first = [c for c in MINORITY_FIRST if c in entries]

    sw = np.array([1.0 / (k + 5) for k in range(len(singles))])
    sw /= sw.sum()
    dw = np.array([1.0 / (k + 3) for k in range(len(doubles))])
    dw /= dw.sum()
    gw = np.array([1.0 / (k + 20) ** 0.6 for k in range(len(given))])
    gw /= gw.sum()

    names = []
    for _ in range(n):
        if rng.random() < 0.95:
            if rng.random() < 0.97:
                surname = singles[rng.choice(len(singles), p=sw)]
            else:
                surname = doubles[rng.choice(len(doubles), p=dw)]
            k = 1 if rng.random() < 0.3 else 2
            given_part = "".join(given[rng.choice(len(given), p=gw)] for _ in range(k))
            names.append(surname + given_part)
        else:
            length = rng.choice([4, 5, 6], p=[0.5, 0.3, 0.2])
            first = minority_first[rng.integers(len(minority_first))]
            rest = "".join(minority[rng.integers(len(minority))] for _ in range(length - 1))
            names.append(first + rest)
    return names


def build_freq_rows(names):
    def substr(chars, start, end):
        return "".join(chars[start - 1 : end if end is not None else len(chars)])

    ranges = {"1:1": (1, 1), "1:2": (1, 2), "2:N": (2, None), "3:N": (3, None)}
    rows = []
    for tag, (s, e) in ranges.items():
        counts = Counter()
        for name in names:
            sub = substr(list(name), s, e)
            if sub:
                counts[sub] += 1
        total = sum(counts.values())
        for sub, c in sorted(counts.items()):
            rows.append((tag, sub, math.log(c / total)))
    return rows


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    entries = parse_char_table()
    for char in entries:
        assert unicodedata.normalize("NFC", char) == char

    py_rows, fc_rows, wb_rows, rd_rows, rds_rows = [], [], [], [], []
    for char in sorted(entries):
        pinyin, comps, structs = entries[char]
        py_rows.append((char, pinyin))
        fc_rows.append((char, fc_code(char, comps)))
        wb_rows.append((char, wb_code(char, comps)))
        rd_rows.append((char, rd_code(comps)))
        rds_rows.append((char, rds_code(comps, structs)))

    write_tsv(OUT / "pinyin.tsv", py_rows, "hanlink demo asset v1: pinyin readings (tone digits), first reading per character")
    write_tsv(OUT / "fourcorner.tsv", fc_rows, "hanlink demo asset v1: four-corner-style 5-digit codes (synthetic, component-derived)")
    write_tsv(OUT / "wubi98.tsv", wb_rows, "hanlink demo asset v1: Wubi98-style letter codes (synthetic, component-derived)")
    write_tsv(OUT / "radicals.tsv", rd_rows, "hanlink demo asset v1: component decompositions, space-separated leaves")
    write_tsv(OUT / "radicals_struct.tsv", rds_rows, "hanlink demo asset v1: component decompositions plus structure marks")

    surnames = [c for c in SINGLE_SURNAMES] + DOUBLE_SURNAMES
    (OUT / "surnames.tsv").write_text(
        "# hanlink demo asset v1: common Han surnames, one per line\n" + "\n".join(surnames) + "\n",
        encoding="utf-8",
    )

    rng = np.random.Generator(np.random.PCG64(20240601))
    names = build_corpus(entries, rng)
    (OUT / "corpus_names.txt").write_text(
        "# hanlink demo asset v1: synthetic name corpus for the positional name model\n"
        + "\n".join(names) + "\n",
        encoding="utf-8",
    )

    freq_rows = build_freq_rows(names)
    lines = ["# hanlink demo asset v1: log relative frequencies from the demo corpus"]
    lines += [f"{tag}\t{sub}\t{val:.10f}" for tag, sub, val in freq_rows]
    (OUT / "freq_demo.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    inventory = set("".join(names))
    missing = sorted(c for c in inventory if c not in entries)
    print(f"chars: {len(entries)}, surnames: {len(surnames)}, corpus: {len(names)}, "
          f"freq rows: {len(freq_rows)}, corpus chars missing from tables: {missing}")


if __name__ == "__main__":
    main()
